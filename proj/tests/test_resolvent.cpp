#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "natscale/error.hpp"
#include "natscale/resolvent.hpp"

using namespace natscale;

namespace {

double gk(const std::function<double(double)>& f, double a, double b)
{
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 25, 1e-13);
}

// int G(x, y) g(y) m(dy) over the pair's window, split at x.
double green_integral(const SpeedMeasure& m, const EigenPair& p, double x, const std::function<double(double)>& g)
{
    const auto w = p.f_minus.window();
    auto integrand = [&](double y) { return green(p, x, y) * g(y) * m.density(y); };
    return gk(integrand, w.lo, x) + gk(integrand, x, w.hi);
}

}  // namespace

TEST_CASE("brownian green function")
{
    const auto p = solve_pair(families::brownian(), 0.5, {-3.0, 3.0});
    for (double x : {-2.0, 0.0, 1.5})
        for (double y : {-2.5, 0.3, 2.0}) CHECK(green(p, x, y) == doctest::Approx(0.5 * std::exp(-std::abs(x - y))).epsilon(1e-10));
    CHECK_THROWS_AS(green(p, 0.0, 4.0), InvalidArgument);
}

TEST_CASE("green symmetry and invariance under rescaling")
{
    for (const auto& m : {families::hybrid(), families::inverse_bessel(), families::double_power_tail()}) {
        const double x0 = m.expansion_point();
        const Window w = m.interval().lo_finite() ? Window{0.3, 4.0} : Window{-2.0, 3.0};
        auto p = solve_pair(m, 0.5, w);
        auto q = p;
        q.f_minus = p.f_minus.scaled(7.0);
        q.f_plus = p.f_plus.scaled(0.2);
        q.wronskian_h = wronskian(q.f_minus, q.f_plus).h;
        for (double x : {w.lo + 0.1, x0, w.hi - 0.2})
            for (double y : {w.lo + 0.3, x0 + 0.4, w.hi - 0.1}) {
                CHECK(std::abs(green(p, x, y) - green(p, y, x)) <= 1e-12 * std::abs(green(p, x, y)));
                CHECK(std::abs(green(q, x, y) - green(p, x, y)) <= 1e-12 * std::abs(green(p, x, y)));
            }
    }
}

TEST_CASE("resolvent of the constant function")
{
    // lambda int G(x, y) m(dy) = 1 with both ends natural.
    const auto m = families::brownian();
    const auto p = solve_pair(m, 0.5, {-30.0, 30.0});
    for (double x : {-1.0, 0.0, 2.0}) CHECK(0.5 * green_integral(m, p, x, [](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("stopped mean transform equals the resolvent of y - l_-")
{
    {
        const auto m = families::absorbed_brownian(0.0);
        const auto p = solve_pair(m, 0.5, {1e-9, 40.0});
        for (double x : {0.5, 1.0, 3.0}) {
            const double lhs = green_integral(m, p, x, [](double y) { return y; });
            CHECK(std::abs(lhs - stopped_mean_laplace(p, x)) <= 1e-6 * stopped_mean_laplace(p, x));
            CHECK(stopped_mean_laplace(p, x) == doctest::Approx(x / 0.5).epsilon(1e-9));
        }
    }
    {
        const auto m = families::inverse_bessel();
        const double R = 60.0;
        const auto p = solve_pair(m, 0.5, {0.02, R});
        for (double x : {0.5, 1.0, 2.0}) {
            double lhs = green_integral(m, p, x, [](double y) { return y; });
            // beyond R: f_+ = y sinh(1/y) ~ 1 + 1/(6 y^2), m(dy) = 2 y^-4 dy
            lhs += p.f_minus.value_at(x) / p.wronskian_h * p.alpha_plus * (1.0 / (R * R) + 1.0 / (12.0 * R * R * R * R));
            CHECK(std::abs(lhs - stopped_mean_laplace(p, x)) <= 1e-6 * stopped_mean_laplace(p, x));
        }
    }
}

TEST_CASE("martingale defect closed form")
{
    // f_- = x exp(-a/x), f_+ = x sinh(a/x)/a, a = sqrt(2 lambda), h = 1.
    const auto m = families::inverse_bessel();
    for (double lam : {0.5, 2.0}) {
        const double a = std::sqrt(2.0 * lam);
        const auto p = solve_pair(m, lam, {0.3, 5.0});
        for (double x : {0.5, 1.0, 2.0, 4.0}) CHECK(martingale_defect(p, x) == doctest::Approx(x * std::exp(-a / x)).epsilon(1e-6));
    }
    const auto b = solve_pair(families::absorbed_brownian(0.0), 0.5, {1e-9, 3.0});
    CHECK(martingale_defect(b, 1.0) == 0.0);
    const auto two = solve_pair(families::brownian(), 0.5, {-1.0, 1.0});
    CHECK_THROWS_AS(martingale_defect(two, 0.0), InvalidArgument);
    CHECK_THROWS_AS(stopped_mean_laplace(two, 0.0), InvalidArgument);
}

TEST_CASE("defect curve limits")
{
    const auto ib = defect_curve(families::inverse_bessel(), 1.0);
    CHECK(ib.target_gap == 1.0);
    CHECK(ib.reaches_gap);
    CHECK(ib.monotone);
    CHECK(std::abs(ib.extrapolated_limit - 1.0) < 1e-3);
    for (std::size_t i = 0; i < ib.lambdas.size(); ++i)
        CHECK(ib.defect[i] == doctest::Approx(std::exp(-std::sqrt(2.0 * ib.lambdas[i]))).epsilon(1e-6));

    const auto ab = defect_curve(families::absorbed_brownian(0.0), 2.0);
    CHECK(ab.target_gap == 2.0);
    CHECK_FALSE(ab.reaches_gap);
    CHECK(std::abs(ab.extrapolated_limit) < 1e-4);

    CHECK_THROWS_WITH_AS(defect_curve(families::brownian(), 0.0), doctest::Contains("conjectured regime"), InvalidArgument);
    CHECK_THROWS_AS(defect_curve(families::inverse_bessel(), -1.0), InvalidArgument);

    std::ostringstream os;
    write_csv(ib, os);
    CHECK(os.str().rfind("lambda,defect,target_gap\n", 0) == 0);
}

TEST_CASE("tauberian limit")
{
    auto sweep = [](auto F) {
        std::vector<TauberianSample> s;
        for (int k = 0; k < 8; ++k) {
            const double l = 0.5 * std::pow(4.0, -k);
            s.push_back({l, F(l)});
        }
        return s;
    };
    // F = 1 / lambda: limit 1, exact.
    const auto one = tauberian_limit(sweep([](double l) { return 1.0 / l; }));
    CHECK(one.limit == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(one.error < 1e-10);
    // F = 1/(lambda + 1) (transform of exp(-t)): limit 0.
    const auto decay = tauberian_limit(sweep([](double l) { return 1.0 / (l + 1.0); }));
    CHECK(std::abs(decay.limit) < 1e-5);
    // F = 2 / sqrt(lambda) has lambda F -> 0 like sqrt(lambda).
    const auto root = tauberian_limit(sweep([](double l) { return 2.0 / std::sqrt(l); }));
    CHECK(std::abs(root.limit) < 1e-6);
    CHECK_THROWS_AS(tauberian_limit({{0.5, 1.0}, {0.4, 1.0}, {0.3, 1.0}, {0.2, 1.0}}), InvalidArgument);
    CHECK_THROWS_AS(tauberian_limit({{0.5, 1.0}, {0.1, 1.0}}), InvalidArgument);
    // Oscillating lambda F never settles.
    std::vector<TauberianSample> wild;
    for (int k = 0; k < 8; ++k) {
        const double l = std::pow(4.0, -k);
        wild.push_back({l, (k % 2 ? 5.0 : -5.0) / l});
    }
    CHECK_THROWS_AS(tauberian_limit(wild), ConvergenceError);
}

TEST_CASE("stehfest inversion")
{
    CHECK(stehfest_invert([](double s) { return 1.0 / (s + 1.0); }, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-5));
    CHECK(stehfest_invert([](double s) { return 1.0 / (s * s); }, 2.5) == doctest::Approx(2.5).epsilon(1e-6));
    CHECK_THROWS_AS(stehfest_invert([](double s) { return s; }, 0.0), InvalidArgument);
    CHECK_THROWS_AS(stehfest_invert([](double s) { return s; }, 1.0, 7), InvalidArgument);
}

TEST_CASE("stopped mean in time")
{
    // Inverse Bessel from 1: E[X_t] = erf(1 / sqrt(2 t)).
    const auto m = families::inverse_bessel();
    for (double t : {0.5, 1.0, 5.0}) CHECK(std::abs(stopped_mean_at(m, 1.0, t) - std::erf(1.0 / std::sqrt(2.0 * t))) < 1e-4);
    CHECK(stopped_mean_at(families::absorbed_brownian(0.0), 1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK_THROWS_AS(stopped_mean_at(families::brownian(), 0.0, 1.0), InvalidArgument);
}
