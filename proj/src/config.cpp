#include "natscale/config.hpp"

#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "natscale/classify.hpp"
#include "natscale/eigen.hpp"
#include "natscale/error.hpp"
#include "natscale/measure.hpp"
#include "natscale/resolvent.hpp"
#include "natscale/simulate.hpp"

namespace natscale {

using nlohmann::json;

namespace {

const std::pair<Command, const char*> kCommands[] = {
    {Command::classify, "classify"}, {Command::eigen, "eigen"},       {Command::green, "green"},
    {Command::defect, "defect"},     {Command::hittime, "hittime"},   {Command::simulate, "simulate"},
    {Command::audit, "audit"},
};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    if (!j.is_object()) throw InvalidArgument(where + ": expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw InvalidArgument(where + ": unknown key '" + k + "'");
}

double number(const json& j, const std::string& key)
{
    if (!j.is_number()) throw InvalidArgument("config key '" + key + "' must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw InvalidArgument("config key '" + key + "' must be finite");
    return v;
}

double positive(const json& j, const std::string& key)
{
    const double v = number(j, key);
    if (!(v > 0.0)) throw InvalidArgument("config key '" + key + "' must be positive");
    return v;
}

std::uint64_t count(const json& j, const std::string& key)
{
    if (!j.is_number_integer() || j.get<long long>() < 0)
        throw InvalidArgument("config key '" + key + "' must be a nonnegative integer");
    return j.get<std::uint64_t>();
}

int bounded_int(const json& j, const std::string& key, int lo, int hi)
{
    if (!j.is_number_integer()) throw InvalidArgument("config key '" + key + "' must be an integer");
    const long long v = j.get<long long>();
    if (v < lo || v > hi)
        throw InvalidArgument("config key '" + key + "' must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
}

std::vector<double> numbers(const json& j, const std::string& key)
{
    if (!j.is_array()) throw InvalidArgument("config key '" + key + "' must be an array of numbers");
    std::vector<double> v;
    for (const auto& e : j) v.push_back(number(e, key));
    return v;
}

Tolerances parse_tolerances(const json& j)
{
    check_keys(j,
               {"panel_order", "points_per_window", "ladder_tol", "ladder_max", "picard_tol", "cauchy_tol",
                "divergence_factor", "divergence_threshold", "dt_base", "boundary_refinement", "bridge_correction"},
               "tolerances");
    Tolerances t;
    if (j.contains("panel_order")) t.panel_order = bounded_int(j["panel_order"], "tolerances.panel_order", 3, 20);
    if (j.contains("points_per_window"))
        t.points_per_window = bounded_int(j["points_per_window"], "tolerances.points_per_window", 16, 1 << 22);
    if (j.contains("ladder_max")) t.ladder_max = bounded_int(j["ladder_max"], "tolerances.ladder_max", 2, 60);
    auto small = [&](const char* k, double& dst) {
        if (!j.contains(k)) return;
        dst = positive(j[k], std::string("tolerances.") + k);
        if (dst >= 1.0) throw InvalidArgument(std::string("config key 'tolerances.") + k + "' must be below 1");
    };
    small("ladder_tol", t.ladder_tol);
    small("picard_tol", t.picard_tol);
    small("cauchy_tol", t.cauchy_tol);
    small("dt_base", t.dt_base);
    if (j.contains("divergence_factor")) {
        t.divergence_factor = number(j["divergence_factor"], "tolerances.divergence_factor");
        if (!(t.divergence_factor > 1.0)) throw InvalidArgument("config key 'tolerances.divergence_factor' must exceed 1");
    }
    if (j.contains("divergence_threshold"))
        t.divergence_threshold = positive(j["divergence_threshold"], "tolerances.divergence_threshold");
    if (j.contains("boundary_refinement"))
        t.boundary_refinement = positive(j["boundary_refinement"], "tolerances.boundary_refinement");
    if (j.contains("bridge_correction")) {
        if (!j["bridge_correction"].is_boolean())
            throw InvalidArgument("config key 'tolerances.bridge_correction' must be a boolean");
        t.bridge_correction = j["bridge_correction"].get<bool>();
    }
    return t;
}

json to_json(const Tolerances& t)
{
    return {{"panel_order", t.panel_order},
            {"points_per_window", t.points_per_window},
            {"ladder_tol", t.ladder_tol},
            {"ladder_max", t.ladder_max},
            {"picard_tol", t.picard_tol},
            {"cauchy_tol", t.cauchy_tol},
            {"divergence_factor", t.divergence_factor},
            {"divergence_threshold", t.divergence_threshold},
            {"dt_base", t.dt_base},
            {"boundary_refinement", t.boundary_refinement},
            {"bridge_correction", t.bridge_correction}};
}

EigenOptions eigen_options(const Tolerances& t)
{
    EigenOptions o;
    o.panel_order = t.panel_order;
    o.points_per_window = t.points_per_window;
    o.ladder_tol = t.ladder_tol;
    o.ladder_max = t.ladder_max;
    o.picard_tol = t.picard_tol;
    return o;
}

ClassifyOptions classify_options(const Tolerances& t)
{
    ClassifyOptions o;
    o.eigen = eigen_options(t);
    o.cauchy_tol = t.cauchy_tol;
    o.divergence_factor = t.divergence_factor;
    o.divergence_threshold = t.divergence_threshold;
    return o;
}

StepControl step_control(const Tolerances& t)
{
    StepControl s;
    s.dt_base = t.dt_base;
    s.boundary_refinement = t.boundary_refinement;
    s.bridge_correction = t.bridge_correction;
    return s;
}

json pair_summary(const EigenPair& p)
{
    return {{"lambda", p.lambda},
            {"wronskian_h", p.wronskian_h},
            {"wronskian_deviation", p.wronskian_deviation},
            {"alpha_plus", p.alpha_plus},
            {"f_minus_normalization", to_string(p.f_minus.normalization)},
            {"f_plus_normalization", to_string(p.f_plus.normalization)},
            {"window", {p.f_minus.grid.lo(), p.f_minus.grid.hi()}},
            {"truncation_window", {p.truncation_window.lo, p.truncation_window.hi}},
            {"grid_points", p.f_minus.grid.size()}};
}

constexpr std::uint64_t kDefaultSeed = 20240601;

}  // namespace

std::string to_string(Command c)
{
    for (const auto& [k, n] : kCommands)
        if (k == c) return n;
    return "?";
}

Command parse_command(const std::string& s)
{
    for (const auto& [k, n] : kCommands)
        if (s == n) return k;
    throw InvalidArgument("unknown command '" + s + "'");
}

RunConfig parse_run_config(const json& j)
{
    check_keys(j,
               {"command", "measure", "x", "y", "lambda", "lambdas", "window", "level", "condition", "t_max",
                "checkpoints", "n_paths", "seed", "out_dir", "tolerances"},
               "config");
    RunConfig c;
    if (j.contains("command")) {
        if (!j["command"].is_string()) throw InvalidArgument("config key 'command' must be a string");
        c.command = parse_command(j["command"].get<std::string>());
    }
    if (!j.contains("measure")) throw InvalidArgument("config key 'measure' is required");
    c.measure = j["measure"];
    build_measure(c.measure);  // validates the descriptor
    if (j.contains("x")) c.x = number(j["x"], "x");
    if (j.contains("y")) c.y = number(j["y"], "y");
    if (j.contains("lambda")) c.lambda = positive(j["lambda"], "lambda");
    if (j.contains("lambdas")) {
        c.lambdas = numbers(j["lambdas"], "lambdas");
        for (double l : c.lambdas)
            if (!(l > 0.0)) throw InvalidArgument("config key 'lambdas' must hold positive values");
    }
    if (j.contains("window")) {
        auto w = numbers(j["window"], "window");
        if (w.size() != 2 || !(w[0] < w[1])) throw InvalidArgument("config key 'window' must be [lo, hi] with lo < hi");
        c.window = w;
    }
    if (j.contains("level")) c.level = number(j["level"], "level");
    if (j.contains("condition")) {
        if (!j["condition"].is_string()) throw InvalidArgument("config key 'condition' must be a string");
        c.condition = j["condition"].get<std::string>();
        if (c.condition != "unconditional" && c.condition != "before_tau_minus")
            throw InvalidArgument("config key 'condition' must be 'unconditional' or 'before_tau_minus'");
    }
    if (j.contains("t_max")) c.t_max = positive(j["t_max"], "t_max");
    if (j.contains("checkpoints")) {
        c.checkpoints = numbers(j["checkpoints"], "checkpoints");
        for (double t : c.checkpoints)
            if (t < 0.0 || t > c.t_max) throw InvalidArgument("config key 'checkpoints' must lie in [0, t_max]");
    }
    if (j.contains("n_paths")) c.n_paths = count(j["n_paths"], "n_paths");
    if (j.contains("seed")) c.seed = count(j["seed"], "seed");
    if (j.contains("out_dir")) {
        if (!j["out_dir"].is_string()) throw InvalidArgument("config key 'out_dir' must be a string");
        c.out_dir = j["out_dir"].get<std::string>();
    }
    if (j.contains("tolerances")) c.tolerances = parse_tolerances(j["tolerances"]);
    return c;
}

json to_json(const RunConfig& c)
{
    json j;
    j["command"] = to_string(c.command);
    j["measure"] = c.measure;
    if (c.x) j["x"] = *c.x;
    if (c.y) j["y"] = *c.y;
    if (c.lambda) j["lambda"] = *c.lambda;
    if (!c.lambdas.empty()) j["lambdas"] = c.lambdas;
    if (c.window) j["window"] = *c.window;
    if (c.level) j["level"] = *c.level;
    j["condition"] = c.condition;
    j["t_max"] = c.t_max;
    if (!c.checkpoints.empty()) j["checkpoints"] = c.checkpoints;
    j["n_paths"] = c.n_paths;
    if (c.seed) j["seed"] = *c.seed;
    j["out_dir"] = c.out_dir;
    j["tolerances"] = to_json(c.tolerances);
    return j;
}

namespace {

json dispatch(const RunConfig& c, RunResult& out)
{
    const SpeedMeasure m = build_measure(c.measure);
    const auto& iv = m.interval();
    const double x = c.x.value_or(m.expansion_point());
    if (!iv.contains(x)) throw InvalidArgument("config key 'x' lies outside the interval");
    const double lambda = c.lambda.value_or(0.5);
    const std::uint64_t seed = c.seed.value_or(kDefaultSeed);
    const EigenOptions eo = eigen_options(c.tolerances);

    auto window = [&]() -> Window {
        if (c.window) return {(*c.window)[0], (*c.window)[1]};
        double lo = x - 1.0, hi = x + 1.0;
        if (iv.lo_finite()) lo = std::max(lo, x - 0.5 * (x - iv.lo));
        if (iv.hi_finite()) hi = std::min(hi, x + 0.5 * (iv.hi - x));
        for (const auto& p : {c.y, c.level})
            if (p) {
                lo = std::min(lo, *p);
                hi = std::max(hi, *p);
            }
        return {lo, hi};
    };

    json r;
    switch (c.command) {
    case Command::classify: {
        r = to_json(classify(m, x, lambda, classify_options(c.tolerances)));
        break;
    }
    case Command::eigen: {
        const EigenPair p = solve_pair(m, lambda, window(), eo);
        r = pair_summary(p);
        std::ostringstream fm, fp;
        write_csv(p.f_minus, fm);
        write_csv(p.f_plus, fp);
        out.csv.emplace_back("f_minus.csv", fm.str());
        out.csv.emplace_back("f_plus.csv", fp.str());
        break;
    }
    case Command::green: {
        if (!c.y) throw InvalidArgument("config key 'y' is required for green");
        const EigenPair p = solve_pair(m, lambda, window(), eo);
        r = {{"x", x}, {"y", *c.y}, {"green", green(p, x, *c.y)}, {"pair", pair_summary(p)}};
        break;
    }
    case Command::defect: {
        DefectOptions d;
        d.eigen = eo;
        const DefectCurve curve = defect_curve(m, x, d);
        r = {{"x", x},
             {"lambdas", curve.lambdas},
             {"defect", curve.defect},
             {"extrapolated_limit", curve.extrapolated_limit},
             {"extrapolation_error", curve.extrapolation_error},
             {"target_gap", curve.target_gap},
             {"reaches_gap", curve.reaches_gap},
             {"monotone", curve.monotone}};
        std::ostringstream os;
        write_csv(curve, os);
        out.csv.emplace_back("defect.csv", os.str());
        break;
    }
    case Command::hittime: {
        if (!c.level) throw InvalidArgument("config key 'level' is required for hittime");
        const EigenPair p = solve_pair(m, lambda, window(), eo);
        r = {{"x", x}, {"level", *c.level}, {"lambda", lambda}, {"analytic", hitting_laplace(p, x, *c.level)},
             {"condition", c.condition}};
        if (c.n_paths > 0) {
            const PathEnsemble e =
                simulate_paths(m, x, c.t_max, c.n_paths, seed, step_control(c.tolerances), {}, {*c.level});
            const auto cond = c.condition == "unconditional" ? HitCondition::unconditional : HitCondition::before_tau_minus;
            r["monte_carlo"] = to_json(estimate_hitting_laplace(e, *c.level, lambda, cond));
        }
        break;
    }
    case Command::simulate: {
        std::vector<double> cps = c.checkpoints.empty() ? std::vector<double>{c.t_max} : c.checkpoints;
        const PathEnsemble e = simulate_paths(m, x, c.t_max, c.n_paths, seed, step_control(c.tolerances), cps);
        r = summary_json(e);
        std::ostringstream os;
        write_csv(e, os);
        out.csv.emplace_back("paths.csv", os.str());
        break;
    }
    case Command::audit: {
        AuditOptions a;
        a.classify = classify_options(c.tolerances);
        a.lambdas = c.lambdas;
        a.seed = seed;
        a.step = step_control(c.tolerances);
        if (!c.checkpoints.empty()) a.mc_times = c.checkpoints;
        const AuditReport rep = consistency_audit(m, x, lambda, c.n_paths, a);
        r = to_json(rep);
        if (!rep.all_consistent) out.exit_code = 1;
        break;
    }
    }
    return r;
}

}  // namespace

RunResult run(const RunConfig& c)
{
    RunResult out;
    const auto t0 = std::chrono::steady_clock::now();
    json body;
    try {
        body = dispatch(c, out);
    } catch (const RefusedVerdict& e) {
        out.exit_code = 2;
        out.csv.clear();
        body = {{"refused", e.what()}};
    } catch (const std::exception& e) {
        out.exit_code = 1;
        out.csv.clear();
        body = {{"error", e.what()}};
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.report = body;
    out.report["command"] = to_string(c.command);
    out.report["config"] = to_json(c);
    out.report["version"] = kVersion;
    out.report["wall_time_s"] = wall;
    return out;
}

}  // namespace natscale
