#include "doctest.h"

#include <filesystem>
#include <sstream>

#include "qwfh/detector.hpp"
#include "qwfh/errors.hpp"
#include "qwfh/io.hpp"
#include "qwfh/run.hpp"

using namespace qwfh;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("qwfh_test_" + name);
    fs::remove_all(p);
    return p;
}

cli::RunConfig config(const std::string& command, const fs::path& out, json params = json::object()) {
    return cli::parse_config(json{{"command", command}, {"output_dir", out.string()}, {"parameters", params}});
}

std::size_t line_count(const std::string& text) {
    return std::count(text.begin(), text.end(), '\n');
}

} // namespace

TEST_CASE("numbers are written with 17 significant digits") {
    CHECK(io::format_double(0.1) == "0.10000000000000001");
    CHECK(std::stod(io::format_double(M_PI)) == M_PI);
    CHECK(io::scan_csv_header() == "phi,P00,P01,P02,P10,P11,P12,P20,P21,P22");
}

TEST_CASE("click matrix CSV round trip") {
    Eigen::MatrixXd P = Eigen::MatrixXd::Random(9, 9);
    const auto back = io::parse_click_matrix_csv(io::click_matrix_csv(P));
    CHECK((back.array() == P.array()).all());
    CHECK_THROWS_AS(io::parse_click_matrix_csv(""), IoError);
    CHECK_THROWS_AS(io::parse_click_matrix_csv("m,0,1\n0,1\n"), IoError);
}

TEST_CASE("dotted overrides") {
    json doc{{"parameters", {{"w0", 0.1}}}};
    cli::set_dotted(doc, "parameters.w0", "0.25");
    cli::set_dotted(doc, "parameters.gpr_a.v", "0.1");
    cli::set_dotted(doc, "output_dir", "some/dir");
    CHECK(doc["parameters"]["w0"] == 0.25);
    CHECK(doc["parameters"]["gpr_a"]["v"] == 0.1);
    CHECK(doc["output_dir"] == "some/dir");
    CHECK_THROWS_AS(cli::set_dotted(doc, "output_dir.x", "1"), ConfigError);
    CHECK_THROWS_AS(cli::set_dotted(doc, "a..b", "1"), ConfigError);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(cli::parse_config(json{{"command", "dance"}}), ConfigError);
    CHECK_THROWS_AS(cli::parse_config(json::object()), ConfigError);
    CHECK_THROWS_AS(cli::parse_config(json{{"command", "bell"}, {"colour", 1}}), ConfigError);
    CHECK_THROWS_AS(cli::parse_config(json{{"command", "bell"}, {"threads", 0}}), ConfigError);
    CHECK(cli::parse_config(json{{"command", "bell"}, {"threads", "auto"}}).threads == 0);
    const auto out = scratch("badparam");
    CHECK(cli::run(config("scan-ssps", out, {{"w9", 1}})).exit_code == cli::kExitConfig);
    CHECK(cli::run(config("scan-ssps", out, {{"w0", "lots"}})).exit_code == cli::kExitConfig);
    CHECK(cli::run(config("invert", out)).exit_code == cli::kExitConfig);
    CHECK(cli::run(config("scan-ssps", out, {{"w0", 0.9}, {"w1", 0.9}})).exit_code == cli::kExitValidation);
}

TEST_CASE("scan-ssps artifacts") {
    const auto out = scratch("ssps");
    const auto r = cli::run(config("scan-ssps", out));
    REQUIRE(r.exit_code == 0);
    const std::string csv = io::read_text((out / "scan_ssps.csv").string());
    CHECK(line_count(csv) == 73);
    CHECK(csv.rfind("phi,P00,P01,P02,P10,P11,P12,P20,P21,P22\n", 0) == 0);
    const json side = json::parse(io::read_text((out / "scan_ssps.json").string()));
    CHECK(side["parameters"]["w0"] == 0.161);
    CHECK(side["hwp_convention"] == "Phi = phi / 4");
}

TEST_CASE("artifacts are identical across thread counts") {
    const auto o1 = scratch("t1"), o3 = scratch("t3");
    auto c1 = config("scan-tmss", o1, {{"grid_points", 16}});
    auto c3 = config("scan-tmss", o3, {{"grid_points", 16}});
    c3.threads = 3;
    REQUIRE(cli::run(c1).exit_code == 0);
    REQUIRE(cli::run(c3).exit_code == 0);
    for (const char* f : {"scan_tmss.csv", "scan_tmss.json"}) {
        CHECK(io::read_text((o1 / f).string()) == io::read_text((o3 / f).string()));
    }
}

TEST_CASE("invert recovers synthetic photon statistics") {
    const auto out = scratch("invert");
    fs::create_directories(out);
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(3, 3);
    F(0, 0) = 0.161;
    F(1, 0) = F(0, 1) = 0.669 / 2;
    F(1, 1) = F(2, 0) = F(0, 2) = 0.17 / 3;
    const auto P = detector::apply_response(F, 0.072, 0.064, 8).P;
    const std::string in = (out / "clicks.csv").string();
    io::write_text(in, io::click_matrix_csv(P));
    const auto r = cli::run(config("invert", out, {{"input", in}}));
    REQUIRE(r.exit_code == 0);
    const json rep = json::parse(io::read_text((out / "invert.json").string()));
    CHECK(rep["w0"].get<double>() == doctest::Approx(0.161).epsilon(1e-8));
    CHECK(rep["w1"].get<double>() == doctest::Approx(0.669).epsilon(1e-8));
}

TEST_CASE("bell and oracle-check reports") {
    const auto out = scratch("bell");
    auto c = config("bell", out, {{"M", 1}, {"starts", 2}, {"max_iterations", 200}});
    REQUIRE(cli::run(c).exit_code == 0);
    const json rep = json::parse(io::read_text((out / "bell_M1.json").string()));
    for (const char* k : {"M", "best_I", "lambda_abs", "theta", "alphas", "betas", "n_starts", "seed"}) {
        CHECK(rep.contains(k));
    }
    CHECK(rep["seed"] == 7);
    const std::string csv = io::read_text((out / "bell.csv").string());
    CHECK(line_count(csv) == 2);

    auto o = config("oracle-check", out, {{"trials", 4}, {"bell_trials", 4}});
    const auto r = cli::run(o);
    CHECK(r.exit_code == 0);
    CHECK(r.summary.rfind("PASS", 0) == 0);
}
