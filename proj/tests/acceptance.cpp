#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "natscale/classify.hpp"
#include "natscale/resolvent.hpp"
#include "natscale/simulate.hpp"

using namespace natscale;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what)
    {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

int failures = 0;

void report(int id, const char* title, double budget_s, const std::function<void(Outcome&)>& body)
{
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.require(false, std::string("exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(s < budget_s, fmt("runtime %.2fs over budget %.1fs", s, budget_s));
    if (!o.ok) ++failures;
    std::printf("%s criterion %d: %s (%.2fs)%s%s\n", o.ok ? "PASS" : "FAIL", id, title, s, o.detail.empty() ? "" : " -- ",
                o.detail.c_str());
    std::fflush(stdout);
}

double sup_rel(const Eigenfunction& f, double scale, const std::function<double(double)>& exact)
{
    double e = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) e = std::max(e, std::abs(f.values[i] / scale / exact(f.x()[i]) - 1.0));
    return e;
}

double gk(const std::function<double(double)>& f, double a, double b)
{
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 25, 1e-13);
}

void brownian_eigenfunctions(Outcome& o)
{
    const auto m = families::brownian();
    const auto [phi, psi] = picard_basis(m, 0.5, {-2.0, 2.0}, 1e-12);
    double pe = 0.0;
    for (std::size_t i = 0; i < phi.values.size(); ++i) {
        const double x = phi.x()[i];
        pe = std::max({pe, std::abs(phi.values[i] - std::cosh(x)), std::abs(psi.values[i] - std::sinh(x))});
    }
    o.require(pe < 1e-8, fmt("picard sup error %.3g", pe));

    const auto p = solve_pair(m, 0.5, {-2.0, 2.0});
    const double cm = p.f_minus.value_at(0.0), cp = p.f_plus.value_at(0.0);
    const double em = sup_rel(p.f_minus, cm, [](double x) { return std::exp(x); });
    const double ep = sup_rel(p.f_plus, cp, [](double x) { return std::exp(-x); });
    o.require(em < 1e-6 && ep < 1e-6, fmt("f- error %.3g, f+ error %.3g", em, ep));
    const double h = p.wronskian_h / (cm * cp);
    o.require(std::abs(h / 2.0 - 1.0) < 1e-6, fmt("h = %.12g", h));
    o.require(p.wronskian_deviation < 1e-6, fmt("wronskian deviation %.3g", p.wronskian_deviation));
}

void inverse_bessel_suite(Outcome& o)
{
    const auto m = families::inverse_bessel();
    const auto p = solve_pair(m, 0.5, {0.2, 10.0});
    const double c = p.f_minus.value_at(1.0) / std::exp(-1.0);
    const double em = sup_rel(p.f_minus, c, [](double x) { return x * std::exp(-1.0 / x); });
    const double ep = sup_rel(p.f_plus, 1.0, [](double x) { return x * std::sinh(1.0 / x); });
    o.require(em < 1e-5 && ep < 1e-5, fmt("f- error %.3g, f+ error %.3g", em, ep));
    o.require(std::abs(p.alpha_plus - 1.0) < 1e-5, fmt("alpha+ = %.12g", p.alpha_plus));
    o.require(std::abs(p.wronskian_h / c - 1.0) < 1e-5, fmt("h = %.12g", p.wronskian_h / c));
    const double d = martingale_defect(p, 1.0);
    o.require(std::abs(d / std::exp(-1.0) - 1.0) < 1e-5, fmt("defect(1) = %.12g", d));
    const auto curve = defect_curve(m, 1.0);
    o.require(std::abs(curve.extrapolated_limit - 1.0) < 1e-3,
              fmt("defect limit %.8g (estimate error %.3g)", curve.extrapolated_limit, curve.extrapolation_error));
}

void decision_table(Outcome& o)
{
    struct Row {
        const char* name;
        SpeedMeasure m;
        Classification want;
    };
    const Row rows[] = {
        {"brownian", families::brownian(), Classification::martingale},
        {"inverse-bessel", families::inverse_bessel(), Classification::strict_supermartingale},
        {"hybrid", families::hybrid(), Classification::strict_supermartingale},
        {"mirrored hybrid", families::mirrored_hybrid(), Classification::strict_submartingale},
        {"double tail", families::double_power_tail(), Classification::strict_local_martingale_only},
    };
    AuditOptions a;
    a.lambdas = {0.1, 0.5, 2.0};
    for (const auto& r : rows) {
        const double x = r.m.expansion_point();
        const auto v = classify(r.m, x, 0.5);
        o.require(v.classification == r.want, std::string(r.name) + " classified " + to_string(v.classification));
        const auto rep = consistency_audit(r.m, x, 0.5, 0, a);
        o.require(rep.all_consistent, std::string(r.name) + " audit inconsistent");
    }
}

void hitting_monte_carlo(Outcome& o)
{
    const std::size_t n = 100000;
    {
        const auto m = families::brownian();
        const double exact = hitting_laplace(solve_pair(m, 0.5, {-0.5, 2.0}), 1.0, 0.0);
        const auto e = simulate_paths(m, 1.0, 20.0, n, 20240601, {}, {}, {0.0});
        const auto est = estimate_hitting_laplace(e, 0.0, 0.5, HitCondition::unconditional);
        o.require(std::abs(est.mean - exact) <= 3 * est.std_error + est.bias_bound && est.std_error < 5e-3,
                  fmt("brownian MC %.5f +- %.5f vs %.5f", est.mean, est.std_error, exact));
    }
    {
        const auto m = families::inverse_bessel();
        const double exact = hitting_laplace(solve_pair(m, 0.5, {0.5, 3.0}), 1.0, 2.0);
        const auto e = simulate_paths(m, 1.0, 20.0, n, 20240602, {}, {}, {2.0});
        const auto est = estimate_hitting_laplace(e, 2.0, 0.5, HitCondition::before_tau_minus);
        o.require(std::abs(est.mean - exact) <= 3 * est.std_error + est.bias_bound && est.std_error < 5e-3,
                  fmt("inverse-bessel MC %.5f +- %.5f vs %.5f", est.mean, est.std_error, exact));
    }
}

void stopped_mean_path_check(Outcome& o)
{
    const auto m = families::inverse_bessel();
    const std::vector<double> ts{1.0, 3.0, 10.0};
    const auto e = simulate_paths(m, 1.0, 10.0, 100000, 20240603, {}, ts);
    std::vector<MCEstimate> est;
    for (double t : ts) est.push_back(estimate_stopped_mean(e, t));
    for (std::size_t i = 0; i + 1 < est.size(); ++i) {
        const double gap = est[i].mean - est[i + 1].mean;
        const double se = std::hypot(est[i].std_error, est[i + 1].std_error);
        o.require(gap > 2 * se, fmt("gap %.5f at t=%g not above %.5f", gap, ts[i], 2 * se));
    }
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double inv = stopped_mean_at(m, 1.0, ts[i]);
        o.require(std::abs(inv - est[i].mean) <= 3 * est[i].std_error + 2e-2,
                  fmt("t=%g: inversion %.5f vs MC %.5f", ts[i], inv, est[i].mean));
    }
}

void invariants(Outcome& o)
{
    // Green symmetry and normalization invariance
    {
        const auto p = solve_pair(families::hybrid(), 0.5, {-2.0, 3.0});
        auto q = p;
        q.f_minus = p.f_minus.scaled(7.0);
        q.f_plus = p.f_plus.scaled(0.2);
        q.wronskian_h = wronskian(q.f_minus, q.f_plus).h;
        double worst = 0.0;
        for (double x : {-1.9, 0.0, 0.95, 2.7})
            for (double y : {-1.5, 0.4, 1.3, 2.9}) {
                const double g = green(p, x, y);
                worst = std::max({worst, std::abs(g - green(p, y, x)) / g, std::abs(g - green(q, x, y)) / g});
            }
        o.require(worst <= 1e-12, fmt("green invariance %.3g", worst));
    }
    // resolvent of y - l_- against the stopped mean transform
    {
        const auto m = families::inverse_bessel();
        const double R = 60.0;
        const auto p = solve_pair(m, 0.5, {0.02, R});
        double worst = 0.0;
        for (double x : {0.5, 1.0, 2.0}) {
            auto f = [&](double y) { return green(p, x, y) * y * m.density(y); };
            double lhs = gk(f, 0.02, x) + gk(f, x, R);
            lhs += p.f_minus.value_at(x) / p.wronskian_h * p.alpha_plus * (1.0 / (R * R) + 1.0 / (12.0 * R * R * R * R));
            const double rhs = stopped_mean_laplace(p, x);
            worst = std::max(worst, std::abs(lhs - rhs) / rhs);
        }
        o.require(worst <= 1e-6, fmt("resolvent identity %.3g", worst));
    }
    // mass additivity
    {
        const auto h = families::hybrid();
        double worst = 0.0;
        for (double b : {-0.5, 0.9, 1.0, 1.7}) {
            const double ac = mass(h, -2.0, 4.0);
            worst = std::max(worst, std::abs(mass(h, -2.0, b) + mass(h, b, 4.0) - ac) / ac);
        }
        o.require(worst <= 1e-12, fmt("mass additivity %.3g", worst));
    }
    // classification under scaling and reflection
    {
        ClassifyOptions q;
        q.defect_evidence = false;
        for (const auto& m : {families::hybrid(), families::mirrored_hybrid(), families::double_power_tail()}) {
            const auto base = classify(m, 0.0, 0.5, q).classification;
            const auto flipped = classify(m.reflected(), 0.0, 0.5, q).classification;
            const bool ok_scale = classify(m.scaled(5.0), 0.0, 0.5, q).classification == base;
            const bool ok_reflect =
                (base == Classification::strict_supermartingale && flipped == Classification::strict_submartingale) ||
                (base == Classification::strict_submartingale && flipped == Classification::strict_supermartingale) ||
                (base == flipped && base != Classification::strict_submartingale &&
                 base != Classification::strict_supermartingale);
            o.require(ok_scale && ok_reflect, "classification not invariant for " + to_string(base));
        }
    }
    // seed reproducibility
    {
        StepControl one, many;
        one.threads = 1;
        many.threads = 7;
        const auto a = simulate_paths(families::inverse_bessel(), 1.0, 3.0, 2000, 99, one, {1.0, 3.0}, {2.0});
        const auto b = simulate_paths(families::inverse_bessel(), 1.0, 3.0, 2000, 99, many, {1.0, 3.0}, {2.0});
        bool same = true;
        for (std::size_t i = 0; i < a.paths.size(); ++i)
            same = same && a.paths[i].states == b.paths[i].states && a.paths[i].hit_times == b.paths[i].hit_times;
        o.require(same, "paths differ across thread counts");
    }
    // step halving on shared noise, brownian stopped means
    {
        StepControl coarse;
        coarse.paired_noise = true;
        StepControl fine = coarse;
        fine.split_steps = true;
        for (const auto& [m, x0] : {std::pair{families::brownian(), 0.0}, std::pair{families::absorbed_brownian(0.0), 1.0}}) {
            const auto a = simulate_paths(m, x0, 10.0, 10000, 7, coarse, {1.0, 5.0, 10.0});
            const auto b = simulate_paths(m, x0, 10.0, 10000, 7, fine, {1.0, 5.0, 10.0});
            for (double t : {1.0, 5.0, 10.0}) {
                const auto sa = estimate_stopped_mean(a, t), sb = estimate_stopped_mean(b, t);
                o.require(std::abs(sa.mean - sb.mean) < sa.std_error,
                          fmt("stopped mean drift %.5f at t=%g, stderr %.5f", sa.mean - sb.mean, t, sa.std_error));
            }
        }
    }
}

void tauberian_calibration(Outcome& o)
{
    auto sweep = [](auto F) {
        std::vector<TauberianSample> s;
        for (int k = 0; k < 8; ++k) {
            const double l = 0.5 * std::pow(4.0, -k);
            s.push_back({l, F(l)});
        }
        return s;
    };
    const auto one = tauberian_limit(sweep([](double l) { return 1.0 / l; }));
    const auto decay = tauberian_limit(sweep([](double l) { return 1.0 / (l + 1.0); }));
    o.require(std::abs(one.limit - 1.0) < 1e-6, fmt("limit for 1: %.10g", one.limit));
    o.require(std::abs(decay.limit) < 1e-6, fmt("limit for exp(-t): %.3g", decay.limit));
}

}  // namespace

int main()
{
    report(1, "brownian eigenfunctions, picard basis and wronskian", 1.0, brownian_eigenfunctions);
    report(2, "inverse-bessel closed forms and defect limit", 5.0, inverse_bessel_suite);
    report(3, "classification decision table with cross-audit", 10.0, decision_table);
    report(4, "hitting-time Laplace transforms against Monte Carlo", 120.0, hitting_monte_carlo);
    report(5, "stopped mean decay against Monte Carlo", 300.0, stopped_mean_path_check);
    report(6, "invariant suites", 120.0, invariants);
    report(7, "tauberian calibration", 0.1, tauberian_calibration);
    std::printf("%d of 7 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
