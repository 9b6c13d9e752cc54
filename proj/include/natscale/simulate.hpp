#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "natscale/measure.hpp"

namespace natscale {

struct StepControl {
    double dt_base = 1e-2;
    // dt = dt_base min(1, refinement d^2 / sigma^2), d the distance to the
    // nearest finite boundary (or max(1, |x|) with none).
    double boundary_refinement = 0.25;
    // Absorption band at a finite end: eps = band max(1, |l|).
    double band = 1e-4;
    // Brownian-bridge test for crossings between grid times.
    bool bridge_correction = true;
    double dt_min = 1e-250;
    // Draw two normals per step: summed into one increment, or with
    // split_steps each driving a half step. Runs differing only in
    // split_steps then share their noise.
    bool paired_noise = false;
    bool split_steps = false;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct PathRecord {
    bool absorbed = false;
    double absorption_time = kInf;
    std::optional<Side> absorbed_at;
    std::vector<double> states;     // one per checkpoint
    std::vector<double> hit_times;  // one per level, inf when not reached
};

struct PathEnsemble {
    double x0 = 0.0;
    double t_max = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    StepControl step;
    Interval interval;
    std::vector<double> checkpoints;
    std::vector<double> levels;
    std::vector<PathRecord> paths;
};

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    std::string estimator;
    std::uint64_t seed = 0;
    double bias_bound = 0.0;
};

// Euler-Maruyama paths of dX = sqrt(2 / rho(X)) dW started at x0, absorbed at
// finite ends. States are recorded at `checkpoints` and first passage times at
// `levels`.
PathEnsemble simulate_paths(const SpeedMeasure& m, double x0, double t_max, std::size_t n, std::uint64_t seed,
                            const StepControl& step = {}, std::vector<double> checkpoints = {},
                            std::vector<double> levels = {});

// Mean of X_{t ^ tau}, or of X_{t ^ tau ^ tau_a} when a lower stop a is given
// (a must be one of the ensemble levels).
MCEstimate estimate_stopped_mean(const PathEnsemble& e, double t, std::optional<double> lower_stop = {});

enum class HitCondition { unconditional, before_tau_minus };

// Mean of exp(-lambda tau_a), zero for paths that miss a before t_max. The
// result is biased low by at most exp(-lambda t_max), reported as bias_bound;
// throws when that exceeds max_bias.
MCEstimate estimate_hitting_laplace(const PathEnsemble& e, double a, double lambda, HitCondition c,
                                    double max_bias = 1e-3);

nlohmann::json summary_json(const PathEnsemble& e);
nlohmann::json to_json(const MCEstimate& e);
// path_id,t,x,absorbed
void write_csv(const PathEnsemble& e, std::ostream& os);

}  // namespace natscale
