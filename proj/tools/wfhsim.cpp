#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qwfh/errors.hpp"
#include "qwfh/io.hpp"
#include "qwfh/run.hpp"

using nlohmann::json;
namespace cli = qwfh::cli;

int main(int argc, char** argv) {
    CLI::App app{"Weak-field homodyne simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::string threads;
    std::uint64_t seed = 0;
    int M = 0;
    int trials = 0;

    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--set", overrides, "override a config field, e.g. --set parameters.w0=0.2");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads or 'auto'");
    auto* seed_opt = app.add_option("--seed", seed, "64-bit seed");

    app.add_subcommand("scan-ssps", "joint click statistics vs phi_A - phi_B, split single photon")->fallthrough();
    app.add_subcommand("scan-tmss", "joint click statistics vs phi_A + phi_B, noisy squeezed vacuum")->fallthrough();
    app.add_subcommand("invert", "photon statistics and source weights from a click matrix")->fallthrough();
    auto* bell = app.add_subcommand("bell", "CGLMP optimization per photon layer")->fallthrough();
    auto* m_opt = bell->add_option("--M", M, "photon layer");
    auto* oracle = app.add_subcommand("oracle-check", "analytic vs dense-oracle agreement")->fallthrough();
    auto* trials_opt = oracle->add_option("--trials", trials, "random configurations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kExitConfig;
    }

    try {
        json doc = json::object();
        if (!config_path.empty()) {
            doc = json::parse(qwfh::io::read_text(config_path));
        }
        const std::string command = app.get_subcommands().front()->get_name();
        if (doc.contains("command") && doc["command"] != command) {
            throw qwfh::ConfigError("config file command '" + doc["command"].get<std::string>() +
                                    "' contradicts subcommand '" + command + "'");
        }
        doc["command"] = command;
        for (const auto& o : overrides) {
            const auto eq = o.find('=');
            if (eq == std::string::npos) {
                throw qwfh::ConfigError("--set expects path=value, got '" + o + "'");
            }
            cli::set_dotted(doc, o.substr(0, eq), o.substr(eq + 1));
        }
        if (!out_dir.empty()) {
            doc["output_dir"] = out_dir;
        }
        if (!threads.empty()) {
            doc["threads"] = threads == "auto" ? json("auto") : json::parse(threads, nullptr, false);
        }
        if (*seed_opt) {
            doc["seed"] = seed;
        }
        if (*m_opt) {
            doc["parameters"]["M"] = M;
        }
        if (*trials_opt) {
            doc["parameters"]["trials"] = trials;
        }

        const cli::RunResult r = cli::run(cli::parse_config(doc));
        std::cout << r.summary;
        if (!r.summary.empty() && r.summary.back() != '\n') {
            std::cout << '\n';
        }
        for (const auto& a : r.artifacts) {
            std::cout << "wrote " << a << '\n';
        }
        return r.exit_code;
    } catch (const qwfh::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cli::kExitConfig;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cli::kExitConfig;
    } catch (const qwfh::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kExitValidation;
    }
}
