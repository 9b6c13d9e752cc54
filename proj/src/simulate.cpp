#include "natscale/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <ostream>
#include <random>
#include <thread>

#include "natscale/error.hpp"

namespace natscale {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based stream: output k of path p is a pure function of (seed, p, k).
class CounterRng {
public:
    using result_type = std::uint64_t;
    CounterRng(std::uint64_t seed, std::uint64_t path) : key_(mix(seed ^ mix(path * kGolden + 0x632be59bd9b4e019ULL))) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() { return mix(key_ + (++counter_) * kGolden); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

struct Boundary {
    bool active;
    double level;  // absorption level (end plus or minus the band)
    double value;  // the end itself
};

void simulate_one(const SpeedMeasure& m, const PathEnsemble& e, std::size_t id, PathRecord& rec)
{
    const auto& iv = e.interval;
    const auto& sc = e.step;
    CounterRng rng(e.seed, id);
    CounterRng urng(~e.seed, id);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    const Boundary lower{iv.lo_finite(), iv.lo + sc.band * std::max(1.0, std::abs(iv.lo)), iv.lo};
    const Boundary upper{iv.hi_finite(), iv.hi - sc.band * std::max(1.0, std::abs(iv.hi)), iv.hi};

    const std::size_t K = e.checkpoints.size(), L = e.levels.size();
    rec.states.assign(K, e.x0);
    rec.hit_times.assign(L, kInf);
    std::size_t pending = 0;
    for (std::size_t j = 0; j < L; ++j) {
        if (e.levels[j] == e.x0)
            rec.hit_times[j] = 0.0;
        else
            ++pending;
    }
    std::size_t ci = 0;
    while (ci < K && e.checkpoints[ci] <= 0.0) ++ci;

    double t = 0.0, x = e.x0;
    // Crossing time of `level` within the step [t, t + dt] from x to xn, or inf.
    auto crossing = [&](double level, double xn, double dt, double s2) {
        const double a = x - level, b = xn - level;
        if (a == 0.0) return t;
        if (a * b <= 0.0) return t + dt * a / (a - b);
        if (sc.bridge_correction) {
            const double p = std::exp(-2.0 * a * b / (s2 * dt));
            if (uniform(urng) < p) return t + 0.5 * dt;
        }
        return kInf;
    };

    while (t < e.t_max) {
        if (ci == K && pending == 0) break;
        const double rho = m.density(x);
        if (!(rho > 0.0) || !std::isfinite(rho))
            throw InvalidArgument("simulate_paths: density not strictly positive at x=" + std::to_string(x));
        const double s2 = 2.0 / rho;
        double d = std::max(1.0, std::abs(x));
        if (lower.active) d = std::min(d, x - iv.lo);
        if (upper.active) d = std::min(d, iv.hi - x);
        double dt = sc.dt_base * std::min(1.0, sc.boundary_refinement * d * d / s2);
        const double stop = ci < K ? std::min(e.checkpoints[ci], e.t_max) : e.t_max;
        bool landed = false;
        if (dt * (1.0 + 1e-9) >= stop - t) {
            dt = stop - t;
            landed = true;
        }
        if (!(dt >= sc.dt_min)) throw ConvergenceError("simulate_paths: time step underflow near x=" + std::to_string(x));

        double zs[2] = {normal(rng), 0.0};
        int parts = 1;
        if (sc.paired_noise) {
            zs[1] = normal(rng);
            if (sc.split_steps)
                parts = 2;
            else
                zs[0] = (zs[0] + zs[1]) / std::sqrt(2.0);
        }
        const double h = dt / parts;
        bool dead = false;
        for (int q = 0; q < parts && !dead; ++q) {
            const double rq = q == 0 ? rho : m.density(x);
            if (!(rq > 0.0) || !std::isfinite(rq))
                throw InvalidArgument("simulate_paths: density not strictly positive at x=" + std::to_string(x));
            const double v2 = 2.0 / rq;
            const double xn = x + std::sqrt(v2 * h) * zs[q];
            for (std::size_t j = 0; j < L; ++j) {
                if (rec.hit_times[j] != kInf) continue;
                const double th = crossing(e.levels[j], xn, h, v2);
                if (th != kInf) {
                    rec.hit_times[j] = th;
                    --pending;
                }
            }
            double ta = kInf;
            if (lower.active) {
                const double th = crossing(lower.level, xn, h, v2);
                if (th < ta) {
                    ta = th;
                    rec.absorbed_at = Side::left;
                }
            }
            if (upper.active) {
                const double th = crossing(upper.level, xn, h, v2);
                if (th < ta) {
                    ta = th;
                    rec.absorbed_at = Side::right;
                }
            }
            t = (landed && q == parts - 1) ? stop : t + h;
            if (ta != kInf) {
                rec.absorbed = true;
                rec.absorption_time = ta;
                const double v = *rec.absorbed_at == Side::left ? lower.value : upper.value;
                for (; ci < K; ++ci) rec.states[ci] = v;
                dead = true;
            }
            x = xn;
        }
        if (dead) break;
        while (ci < K && e.checkpoints[ci] <= t) rec.states[ci++] = x;
    }
    for (; ci < K; ++ci) rec.states[ci] = x;
}

MCEstimate finish(const std::vector<double>& v, std::string id, std::uint64_t seed)
{
    MCEstimate r;
    r.n = v.size();
    r.estimator = std::move(id);
    r.seed = seed;
    if (v.empty()) throw InvalidArgument("estimate: empty ensemble");
    double s = 0.0;
    for (double x : v) s += x;
    r.mean = s / v.size();
    double q = 0.0;
    for (double x : v) q += (x - r.mean) * (x - r.mean);
    r.std_error = v.size() > 1 ? std::sqrt(q / (v.size() - 1)) / std::sqrt(static_cast<double>(v.size())) : 0.0;
    return r;
}

std::size_t level_index(const PathEnsemble& e, double a)
{
    for (std::size_t j = 0; j < e.levels.size(); ++j)
        if (e.levels[j] == a) return j;
    throw InvalidArgument("level " + std::to_string(a) + " was not requested at simulation time");
}

}  // namespace

PathEnsemble simulate_paths(const SpeedMeasure& m, double x0, double t_max, std::size_t n, std::uint64_t seed,
                            const StepControl& step, std::vector<double> checkpoints, std::vector<double> levels)
{
    if (m.has_atoms()) throw InvalidArgument("simulate_paths: measures with atoms cannot be simulated");
    if (!m.interval().contains(x0)) throw InvalidArgument("simulate_paths: x0 outside the interval");
    if (!(t_max > 0.0)) throw InvalidArgument("simulate_paths: t_max must be positive");
    if (!(step.dt_base > 0.0) || !(step.boundary_refinement > 0.0) || !(step.band >= 0.0))
        throw InvalidArgument("simulate_paths: invalid step control");
    std::sort(checkpoints.begin(), checkpoints.end());
    for (double c : checkpoints)
        if (c < 0.0 || c > t_max) throw InvalidArgument("simulate_paths: checkpoint outside [0, t_max]");
    for (double a : levels)
        if (!m.interval().contains(a)) throw InvalidArgument("simulate_paths: level outside the interval");

    PathEnsemble e;
    e.x0 = x0;
    e.t_max = t_max;
    e.n_paths = n;
    e.seed = seed;
    e.step = step;
    e.interval = m.interval();
    e.checkpoints = std::move(checkpoints);
    e.levels = std::move(levels);
    e.paths.resize(n);
    if (n == 0) return e;

    unsigned threads = step.threads ? step.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::exception_ptr> errors(threads);
    auto work = [&](unsigned w) {
        try {
            for (std::size_t i = w; i < n; i += threads) simulate_one(m, e, i, e.paths[i]);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    }
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
    return e;
}

MCEstimate estimate_stopped_mean(const PathEnsemble& e, double t, std::optional<double> lower_stop)
{
    std::size_t k = e.checkpoints.size();
    for (std::size_t i = 0; i < e.checkpoints.size(); ++i)
        if (e.checkpoints[i] == t) k = i;
    if (k == e.checkpoints.size()) throw InvalidArgument("estimate_stopped_mean: missing checkpoint at t=" + std::to_string(t));
    std::optional<std::size_t> j;
    if (lower_stop) j = level_index(e, *lower_stop);
    std::vector<double> v(e.paths.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& p = e.paths[i];
        v[i] = (j && p.hit_times[*j] <= t) ? *lower_stop : p.states[k];
    }
    return finish(v, "stopped_mean", e.seed);
}

MCEstimate estimate_hitting_laplace(const PathEnsemble& e, double a, double lambda, HitCondition c, double max_bias)
{
    if (!(lambda > 0.0)) throw InvalidArgument("estimate_hitting_laplace: lambda must be positive");
    if (!e.interval.contains(a)) throw InvalidArgument("estimate_hitting_laplace: level outside the interval");
    const std::string id = c == HitCondition::unconditional ? "hitting_laplace" : "hitting_laplace_before_tau_minus";
    if (a == e.x0) {
        MCEstimate r = finish(std::vector<double>(std::max<std::size_t>(e.paths.size(), 1), 1.0), id, e.seed);
        r.n = e.paths.size();
        return r;
    }
    const double bias = std::exp(-lambda * e.t_max);
    if (bias > max_bias)
        throw InvalidArgument("estimate_hitting_laplace: truncation bias bound " + std::to_string(bias) +
                              " exceeds tolerance; increase t_max");
    const std::size_t j = level_index(e, a);
    std::vector<double> v(e.paths.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& p = e.paths[i];
        double tau = p.hit_times[j];
        if (c == HitCondition::before_tau_minus && p.absorbed_at == Side::left && p.absorption_time < tau) tau = kInf;
        v[i] = tau == kInf ? 0.0 : std::exp(-lambda * tau);
    }
    MCEstimate r = finish(v, id, e.seed);
    r.bias_bound = bias;
    return r;
}

nlohmann::json to_json(const MCEstimate& e)
{
    return {{"mean", e.mean}, {"stderr", e.std_error}, {"n", e.n},
            {"estimator", e.estimator}, {"seed", e.seed}, {"bias_bound", e.bias_bound}};
}

nlohmann::json summary_json(const PathEnsemble& e)
{
    std::size_t absorbed_lo = 0, absorbed_hi = 0;
    for (const auto& p : e.paths) {
        if (p.absorbed_at == Side::left) ++absorbed_lo;
        if (p.absorbed_at == Side::right) ++absorbed_hi;
    }
    nlohmann::json j;
    j["x0"] = e.x0;
    j["t_max"] = e.t_max;
    j["n_paths"] = e.n_paths;
    j["seed"] = e.seed;
    j["step_control"] = {{"dt_base", e.step.dt_base},
                         {"boundary_refinement", e.step.boundary_refinement},
                         {"band", e.step.band},
                         {"bridge_correction", e.step.bridge_correction},
                         {"paired_noise", e.step.paired_noise},
                         {"split_steps", e.step.split_steps}};
    j["absorbed_left"] = absorbed_lo;
    j["absorbed_right"] = absorbed_hi;
    nlohmann::json cps = nlohmann::json::array();
    for (double t : e.checkpoints) {
        nlohmann::json c{{"t", t}};
        if (e.n_paths > 0) c["stopped_mean"] = to_json(estimate_stopped_mean(e, t));
        cps.push_back(c);
    }
    j["checkpoints"] = cps;
    j["levels"] = e.levels;
    return j;
}

void write_csv(const PathEnsemble& e, std::ostream& os)
{
    os << std::setprecision(17) << "path_id,t,x,absorbed\n";
    for (std::size_t i = 0; i < e.paths.size(); ++i) {
        const auto& p = e.paths[i];
        for (std::size_t k = 0; k < e.checkpoints.size(); ++k) {
            const bool dead = p.absorbed && p.absorption_time <= e.checkpoints[k];
            os << i << "," << e.checkpoints[k] << "," << p.states[k] << "," << (dead ? 1 : 0) << "\n";
        }
    }
}

}  // namespace natscale
