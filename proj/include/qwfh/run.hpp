#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

// Command drivers behind the wfhsim executable.
namespace qwfh::cli {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct RunConfig {
    std::string command;
    /// Inputs of the target module; unknown keys are rejected.
    nlohmann::json parameters = nlohmann::json::object();
    std::string output_dir = ".";
    std::uint64_t seed = 7;
    int threads = 1;  // 0 means one per hardware thread
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitConfig = 2;

/// Sets doc[a][b][c] = value for path "a.b.c"; the value is read as JSON
/// when it parses and kept as a string otherwise.
void set_dotted(nlohmann::json& doc, const std::string& path, const std::string& value);

/// {command, parameters, output_dir, seed, threads}; throws ConfigError.
RunConfig parse_config(const nlohmann::json& doc);

/// Parameters of a command with all defaults filled in.
nlohmann::json resolved_parameters(const RunConfig& config);

struct RunResult {
    int exit_code = kExitOk;
    std::string summary;
    std::vector<std::string> artifacts;
};

/// Executes the command and writes its artifacts into output_dir. Library
/// errors are converted to exit codes; the message lands in summary.
RunResult run(const RunConfig& config);

} // namespace qwfh::cli
