#include "qwfh/run.hpp"

#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <thread>

#include "qwfh/bell.hpp"
#include "qwfh/crosscheck.hpp"
#include "qwfh/detector.hpp"
#include "qwfh/errors.hpp"
#include "qwfh/homodyne.hpp"
#include "qwfh/io.hpp"

namespace qwfh::cli {
namespace {

using nlohmann::json;

json defaults_for(const std::string& command) {
    const json channel_bs{{"t_a", M_SQRT1_2}, {"t_b", M_SQRT1_2}, {"gpr_a", nullptr}, {"gpr_b", nullptr},
                          {"bins", detector::kDefaultBins}, {"grid_points", 72}, {"max_clicks", 2},
                          {"photon_cutoff", 0}, {"phase_a", 0.0}, {"phase_b", 0.0}};
    if (command == "scan-ssps") {
        json d{{"w0", 0.161}, {"w1", 0.669}, {"eta_a", 0.072}, {"eta_b", 0.064}, {"alpha_a", 0.510},
               {"alpha_b", 0.585}};
        d.update(channel_bs);
        return d;
    }
    if (command == "scan-tmss") {
        json d{{"lambda", 0.295}, {"lambda_phase", 0.0}, {"p", 0.04},  {"eta_a", 0.132},
               {"eta_b", 0.155},  {"alpha_a", 0.365},    {"alpha_b", 0.347}};
        d.update(channel_bs);
        return d;
    }
    if (command == "bell") {
        return json{{"M", json::array({1, 2, 3, 4, 5, 6, 7, 8})},
                    {"starts", 64},
                    {"max_iterations", 4000},
                    {"simplex_tolerance", 1e-9},
                    {"lambda_max", 0.95},
                    {"lo_max", 2.0},
                    {"free_beam_splitters", false}};
    }
    if (command == "oracle-check") {
        return json{{"trials", 50}, {"bell_trials", 50}, {"tolerance", 1e-9}, {"bell_tolerance", 1e-10}};
    }
    if (command == "invert") {
        return json{{"input", nullptr}, {"eta_a", 0.072}, {"eta_b", 0.064}, {"bins", detector::kDefaultBins},
                    {"support", 2},     {"max_condition", 1e8}};
    }
    throw ConfigError("unknown command '" + command + "'");
}

std::optional<detector::GprModel> parse_gpr(const json& j) {
    if (j.is_null()) {
        return std::nullopt;
    }
    if (!j.is_object()) {
        throw ConfigError("GPR model must be an object {r0, v, theta0} or null");
    }
    detector::GprModel g;
    g.r0 = j.value("r0", g.r0);
    g.v = j.value("v", g.v);
    g.theta0 = j.value("theta0", g.theta0);
    g.validate();
    return g;
}

homodyne::WfhChannel channel_from(const json& p, const char side) {
    const std::string s(1, side);
    homodyne::WfhChannel ch;
    ch.lo_magnitude = p.at("alpha_" + s).get<double>();
    ch.lo_phase = p.at("phase_" + s).get<double>();
    ch.bs = BeamSplitter::from_transmittivity(p.at("t_" + s).get<double>());
    ch.eta = p.at("eta_" + s).get<double>();
    ch.bins = p.at("bins").get<int>();
    if (ch.lo_magnitude < 0.0) {
        throw ConfigError("alpha_" + s + " is a magnitude and must be nonnegative");
    }
    return ch;
}

std::string path_in(const RunConfig& c, const std::string& name) {
    return (std::filesystem::path(c.output_dir) / name).string();
}

json provenance(const RunConfig& c, const json& params) {
    // Thread count is left out so artifacts stay identical across machines.
    return json{{"artifact_version", kArtifactVersion},
                {"command", c.command},
                {"seed", c.seed},
                {"parameters", params}};
}

std::string dump(const json& j) {
    return j.dump(2) + "\n";
}

RunResult emit_scan(const RunConfig& c, const json& p, const homodyne::PhaseScan& scan, const std::string& stem) {
    RunResult out;
    const int max_clicks = p.at("max_clicks").get<int>();
    const std::string csv = path_in(c, stem + ".csv");
    const std::string side = path_in(c, stem + ".json");
    io::write_text(csv, io::scan_csv(scan, max_clicks));
    json prov = provenance(c, p);
    prov["axis"] = scan.axis == homodyne::ScanAxis::difference ? "phi_minus = phi_A - phi_B"
                                                                : "phi_plus = phi_A + phi_B";
    prov["phase_unit"] = "radians of the scan axis";
    prov["hwp_convention"] = "Phi = phi / 4";
    prov["columns"] = io::scan_csv_header(max_clicks);
    double worst = 0.0;
    for (const auto& r : scan.results) {
        worst = std::max(worst, std::abs(r.truncation_deficit));
    }
    prov["max_truncation_deficit"] = worst;
    io::write_text(side, dump(prov));
    out.artifacts = {csv, side};
    out.summary = stem + ": " + std::to_string(scan.grid.size()) + " phase points";
    return out;
}

homodyne::ScanOptions scan_options(const RunConfig& c, const json& p) {
    homodyne::ScanOptions o;
    o.grid = homodyne::uniform_grid(p.at("grid_points").get<int>());
    o.threads = c.threads;
    o.photon_cutoff = p.at("photon_cutoff").get<int>();
    return o;
}

RunResult run_scan_ssps(const RunConfig& c, const json& p) {
    const auto scan = homodyne::ssps_scan(p.at("w0").get<double>(), p.at("w1").get<double>(), channel_from(p, 'a'),
                                          channel_from(p, 'b'), parse_gpr(p.at("gpr_a")), parse_gpr(p.at("gpr_b")),
                                          scan_options(c, p));
    return emit_scan(c, p, scan, "scan_ssps");
}

RunResult run_scan_tmss(const RunConfig& c, const json& p) {
    const cplx lambda = std::polar(p.at("lambda").get<double>(), p.at("lambda_phase").get<double>());
    const auto scan = homodyne::tmss_scan(lambda, p.at("p").get<double>(), channel_from(p, 'a'), channel_from(p, 'b'),
                                          parse_gpr(p.at("gpr_a")), parse_gpr(p.at("gpr_b")), scan_options(c, p));
    return emit_scan(c, p, scan, "scan_tmss");
}

json lo_json(cplx z) {
    return json{{"abs", std::abs(z)}, {"phase", std::arg(z)}};
}

RunResult run_bell(const RunConfig& c, const json& p) {
    std::vector<int> Ms;
    if (p.at("M").is_array()) {
        Ms = p.at("M").get<std::vector<int>>();
    } else {
        Ms.push_back(p.at("M").get<int>());
    }
    if (Ms.empty()) {
        throw ConfigError("bell needs at least one M");
    }
    bell::SearchConfig sc;
    sc.starts = p.at("starts").get<int>();
    sc.seed = c.seed;
    sc.max_iterations = p.at("max_iterations").get<int>();
    sc.simplex_tolerance = p.at("simplex_tolerance").get<double>();
    sc.lambda_max = p.at("lambda_max").get<double>();
    sc.lo_max = p.at("lo_max").get<double>();
    sc.free_beam_splitters = p.at("free_beam_splitters").get<bool>();
    sc.threads = c.threads;

    RunResult out;
    std::ostringstream table;
    table << "M,best_I,lambda_abs,theta,converged_fraction,boundary_hits\n";
    std::ostringstream summary;
    for (int M : Ms) {
        const bell::OptimizationResult r = bell::optimize_IM(M, sc);
        json starts = json::array();
        for (const auto& s : r.starts) {
            starts.push_back({{"index", s.index},
                              {"initial_I", s.initial_value},
                              {"final_I", s.value},
                              {"iterations", s.iterations},
                              {"converged", s.converged},
                              {"boundary_hits", s.boundary_hits}});
        }
        json report{{"M", M},
                    {"best_I", r.value},
                    {"lambda_abs", std::abs(r.best.lambda)},
                    {"theta", std::arg(r.best.lambda)},
                    {"alphas", {lo_json(r.best.alpha[0]), lo_json(r.best.alpha[1])}},
                    {"betas", {lo_json(r.best.beta[0]), lo_json(r.best.beta[1])}},
                    {"pbs_t", {r.best.pbs.t1, r.best.pbs.t2}},
                    {"n_starts", sc.starts},
                    {"seed", c.seed},
                    {"best_start", r.best_start},
                    {"converged_fraction", r.converged_fraction},
                    {"boundary_hits", r.boundary_hits},
                    {"local_bound", 2.0},
                    {"starts", starts}};
        const std::string path = path_in(c, "bell_M" + std::to_string(M) + ".json");
        io::write_text(path, dump(report));
        out.artifacts.push_back(path);
        table << M << ',' << io::format_double(r.value) << ',' << io::format_double(std::abs(r.best.lambda)) << ','
              << io::format_double(std::arg(r.best.lambda)) << ',' << io::format_double(r.converged_fraction) << ','
              << r.boundary_hits << '\n';
        summary << "M=" << M << " I=" << io::format_double(r.value) << "\n";
    }
    const std::string csv = path_in(c, "bell.csv");
    io::write_text(csv, table.str());
    const std::string prov = path_in(c, "bell_provenance.json");
    io::write_text(prov, dump(provenance(c, p)));
    out.artifacts.push_back(csv);
    out.artifacts.push_back(prov);
    out.summary = summary.str();
    return out;
}

RunResult run_oracle_check(const RunConfig& c, const json& p) {
    const int trials = p.at("trials").get<int>();
    const int bell_trials = p.at("bell_trials").get<int>();
    const double tol = p.at("tolerance").get<double>();
    const double bell_tol = p.at("bell_tolerance").get<double>();
    if (trials < 0 || bell_trials < 0) {
        throw ConfigError("trial counts must be nonnegative");
    }
    const crosscheck::Report rep = crosscheck::run(trials, bell_trials, c.seed, c.threads);
    const double wfh_dev = rep.max_wfh_deviation();
    const double bell_dev = rep.max_bell_deviation();
    const bool pass = wfh_dev < tol && bell_dev < bell_tol;

    json rows = json::array();
    for (const auto& t : rep.wfh) {
        rows.push_back({{"index", t.index},
                        {"state", t.tmss ? "tmss" : "ssps"},
                        {"oracle_cutoff", t.oracle_cutoff},
                        {"photon_deviation", t.photon_deviation},
                        {"click_deviation", t.click_deviation}});
    }
    json brows = json::array();
    for (const auto& t : rep.bell) {
        brows.push_back({{"index", t.index},
                         {"closed_vs_layer", t.closed_vs_layer},
                         {"closed_vs_oracle", t.closed_vs_oracle},
                         {"layer_vs_oracle_raw", t.layer_vs_oracle_raw}});
    }
    json report = provenance(c, p);
    report["pass"] = pass;
    report["max_wfh_deviation"] = wfh_dev;
    report["max_bell_deviation"] = bell_dev;
    report["wfh_trials"] = rows;
    report["bell_trials"] = brows;
    const std::string path = path_in(c, "oracle_check.json");
    io::write_text(path, dump(report));

    RunResult out;
    out.exit_code = pass ? kExitOk : kExitValidation;
    out.artifacts = {path};
    out.summary = std::string(pass ? "PASS" : "FAIL") + " oracle-check: max wfh deviation " +
                  io::format_double(wfh_dev) + ", max bell deviation " + io::format_double(bell_dev);
    return out;
}

RunResult run_invert(const RunConfig& c, const json& p) {
    if (!p.at("input").is_string()) {
        throw ConfigError("invert needs parameters.input, the path of a click-matrix CSV");
    }
    const Eigen::MatrixXd P = io::parse_click_matrix_csv(io::read_text(p.at("input").get<std::string>()));
    const int bins = p.at("bins").get<int>();
    if (P.rows() != bins + 1 || P.cols() != bins + 1) {
        throw DimensionMismatch("click matrix does not match bins + 1");
    }
    const double ea = p.at("eta_a").get<double>();
    const double eb = p.at("eta_b").get<double>();
    const int support = p.at("support").get<int>();
    const Eigen::MatrixXd F = detector::invert_response(P, ea, eb, bins, support, p.at("max_condition").get<double>());
    const Eigen::MatrixXd back = detector::apply_response(F, ea, eb, bins).P;

    const std::string csv = path_in(c, "invert_photon_stats.csv");
    io::write_text(csv, io::click_matrix_csv(F));
    json report = provenance(c, p);
    report["w0"] = F(0, 0);
    report["w1"] = support >= 1 ? F(1, 0) + F(0, 1) : 0.0;
    report["residual"] = (back - P).cwiseAbs().maxCoeff();
    const std::string js = path_in(c, "invert.json");
    io::write_text(js, dump(report));

    RunResult out;
    out.artifacts = {csv, js};
    out.summary = "invert: w0=" + io::format_double(F(0, 0)) + " w1=" + io::format_double(report["w1"].get<double>());
    return out;
}

} // namespace

void set_dotted(json& doc, const std::string& path, const std::string& value) {
    if (path.empty()) {
        throw ConfigError("empty override path");
    }
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) {
            throw ConfigError("malformed override path '" + path + "'");
        }
        if (!node->is_object()) {
            if (!node->is_null()) {
                throw ConfigError("override path '" + path + "' walks into a non-object");
            }
            *node = json::object();
        }
        node = &(*node)[key];
        if (dot == std::string::npos) {
            break;
        }
        start = dot + 1;
    }
    const json parsed = json::parse(value, nullptr, false);
    *node = parsed.is_discarded() ? json(value) : parsed;
}

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) {
        throw ConfigError("configuration must be a JSON object");
    }
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        static const std::vector<std::string> known{"command", "parameters", "output_dir", "seed", "threads"};
        if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
            throw ConfigError("unknown configuration field '" + it.key() + "'");
        }
    }
    RunConfig c;
    try {
        if (!doc.contains("command")) {
            throw ConfigError("configuration lacks a command");
        }
        c.command = doc.at("command").get<std::string>();
        defaults_for(c.command);
        if (doc.contains("parameters")) {
            c.parameters = doc.at("parameters");
            if (!c.parameters.is_object()) {
                throw ConfigError("parameters must be an object");
            }
        }
        c.output_dir = doc.value("output_dir", c.output_dir);
        if (doc.contains("seed")) {
            const json& s = doc.at("seed");
            if (!s.is_number_integer()) {
                throw ConfigError("seed must be an integer");
            }
            c.seed = s.get<std::uint64_t>();
        }
        if (doc.contains("threads")) {
            const json& t = doc.at("threads");
            if (t.is_string() && t.get<std::string>() == "auto") {
                c.threads = 0;
            } else if (t.is_number_integer() && t.get<int>() >= 1) {
                c.threads = t.get<int>();
            } else {
                throw ConfigError("threads must be a positive integer or \"auto\"");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("configuration: ") + e.what());
    }
    return c;
}

json resolved_parameters(const RunConfig& config) {
    json p = defaults_for(config.command);
    for (auto it = config.parameters.begin(); it != config.parameters.end(); ++it) {
        if (!p.contains(it.key())) {
            throw ConfigError("command '" + config.command + "' has no parameter '" + it.key() + "'");
        }
        p[it.key()] = it.value();
    }
    return p;
}

RunResult run(const RunConfig& config) {
    RunResult out;
    try {
        const json p = resolved_parameters(config);
        std::filesystem::create_directories(config.output_dir);
        try {
            if (config.command == "scan-ssps") {
                return run_scan_ssps(config, p);
            }
            if (config.command == "scan-tmss") {
                return run_scan_tmss(config, p);
            }
            if (config.command == "bell") {
                return run_bell(config, p);
            }
            if (config.command == "oracle-check") {
                return run_oracle_check(config, p);
            }
            return run_invert(config, p);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("parameter: ") + e.what());
        }
    } catch (const ConfigError& e) {
        out.exit_code = kExitConfig;
        out.summary = std::string("config error: ") + e.what();
    } catch (const std::filesystem::filesystem_error& e) {
        out.exit_code = kExitValidation;
        out.summary = std::string("io error: ") + e.what();
    } catch (const Error& e) {
        out.exit_code = kExitValidation;
        out.summary = std::string("error: ") + e.what();
    }
    return out;
}

} // namespace qwfh::cli
