#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace natscale {

inline constexpr const char* kVersion = "0.1.0";

enum class Command { classify, eigen, green, defect, hittime, simulate, audit };
std::string to_string(Command c);
Command parse_command(const std::string& s);

struct Tolerances {
    int panel_order = 9;
    int points_per_window = 4096;
    double ladder_tol = 1e-6;
    int ladder_max = 40;
    double picard_tol = 1e-12;
    double cauchy_tol = 1e-6;
    double divergence_factor = 1.5;
    double divergence_threshold = 1e6;
    double dt_base = 1e-2;
    double boundary_refinement = 0.25;
    bool bridge_correction = true;

    bool operator==(const Tolerances&) const = default;
};

struct RunConfig {
    Command command = Command::classify;
    nlohmann::json measure;
    std::optional<double> x;
    std::optional<double> y;
    std::optional<double> lambda;
    std::vector<double> lambdas;
    std::optional<std::vector<double>> window;
    std::optional<double> level;
    std::string condition = "unconditional";
    double t_max = 10.0;
    std::vector<double> checkpoints;
    std::uint64_t n_paths = 0;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    Tolerances tolerances;

    bool operator==(const RunConfig&) const = default;
};

// Strict: unknown keys and out-of-range values throw InvalidArgument naming
// the key.
RunConfig parse_run_config(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);

struct RunResult {
    int exit_code = 0;
    nlohmann::json report;
    // name -> contents, written next to the report
    std::vector<std::pair<std::string, std::string>> csv;
};

// Dispatches one command. Exit codes: 0 success, 1 error or inconsistent
// audit, 2 refused verdict. Never throws for domain errors.
RunResult run(const RunConfig& c);

}  // namespace natscale
