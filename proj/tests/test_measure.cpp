#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "natscale/error.hpp"
#include "natscale/measure.hpp"

using namespace natscale;
using nlohmann::json;

namespace {

double gk(const std::function<double(double)>& f, double a, double b)
{
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

}  // namespace

TEST_CASE("interval case tags")
{
    CHECK(Interval(0.0, kInf).case_tag() == CaseTag::case_i);
    CHECK(Interval(-kInf, kInf).case_tag() == CaseTag::case_ii);
    CHECK(Interval(-1.0, 1.0).case_tag() == CaseTag::bounded);
    CHECK(Interval(-kInf, 3.0).case_tag() == CaseTag::case_i_mirrored);
    CHECK_THROWS_AS(Interval(1.0, 1.0), InvalidArgument);
}

TEST_CASE("built-in tail flags")
{
    const auto b = families::brownian();
    CHECK(b.tail(Side::left).verdict == TailVerdict::infinite);
    CHECK(b.tail(Side::right).verdict == TailVerdict::infinite);
    const auto ib = families::inverse_bessel();
    CHECK(ib.tail(Side::right).verdict == TailVerdict::finite);
    const auto h = families::hybrid();
    CHECK(h.tail(Side::left).verdict == TailVerdict::infinite);
    CHECK(h.tail(Side::right).verdict == TailVerdict::finite);
}

TEST_CASE("mass closed forms")
{
    CHECK(mass(families::brownian(), 0.0, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(mass(families::inverse_bessel(), 1.0, 2.0) == doctest::Approx(7.0 / 12.0).epsilon(1e-14));
    CHECK(mass(families::hybrid(), 0.3, 0.3) == 0.0);
    CHECK_THROWS_AS(mass(families::brownian(), 1.0, 0.0), InvalidArgument);
    CHECK_THROWS_AS(mass(families::inverse_bessel(), -1.0, 1.0), InvalidArgument);
}

TEST_CASE("mass agrees with Gauss-Kronrod on every family")
{
    for (const auto& m : {families::brownian(), families::inverse_bessel(), families::hybrid(), families::double_power_tail(),
                          families::mirrored_hybrid()}) {
        const double a = m.interval().lo_finite() ? 0.15 : -3.7;
        for (double b : {0.4, 1.0, 2.5, 9.0}) {
            if (b <= a) continue;
            const auto& pieces = m.knots();
            std::vector<double> cuts{a};
            for (double k : pieces)
                if (k > a && k < b) cuts.push_back(k);
            cuts.push_back(b);
            double ref = 0.0;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
                ref += gk([&](double x) { return m.density(x); }, cuts[i], cuts[i + 1]);
            CHECK(mass(m, a, b) == doctest::Approx(ref).epsilon(1e-12));
        }
    }
}

TEST_CASE("mass is additive and monotone")
{
    const auto h = families::hybrid();
    for (double b : {-0.5, 0.9, 1.0, 1.7}) {
        const double ab = mass(h, -2.0, b), bc = mass(h, b, 4.0), ac = mass(h, -2.0, 4.0);
        CHECK(std::abs(ab + bc - ac) <= 1e-12 * ac);
    }
    CHECK(mass(h, -3.0, 5.0) >= mass(h, -2.0, 4.0));
}

TEST_CASE("atoms are counted on (a, b]")
{
    const auto m = build_measure(
        {{"family", "constant"}, {"interval", {"-inf", "inf"}}, {"density", 1.0}, {"atoms", {{0.5, 0.25}}}});
    CHECK(mass(m, 0.0, 0.5) == doctest::Approx(0.75));
    CHECK(mass(m, 0.5, 1.0) == doctest::Approx(0.5));
    CHECK(mass(m, 0.5, 0.5) == 0.0);
}

TEST_CASE("first moment tails")
{
    const auto ib = families::inverse_bessel();
    const auto t = first_moment_tail(ib, 1.0, Side::right);
    CHECK(t.verdict == TailVerdict::finite);
    REQUIRE(t.value);
    CHECK(*t.value == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(first_moment_tail(families::brownian(), 1.0, Side::right).verdict == TailVerdict::infinite);
    const auto bounded = first_moment_tail(ib, 1.0, Side::left);
    CHECK(bounded.verdict == TailVerdict::finite);
    CHECK_THROWS_AS(first_moment_tail(ib, -1.0, Side::right), InvalidArgument);

    // Reference: int_r^inf 2 x^-3 dx = r^-2.
    for (double r : {0.5, 2.0, 7.0}) CHECK(*first_moment_tail(ib, r, Side::right).value == doctest::Approx(1.0 / (r * r)));
}

TEST_CASE("tail verdicts invariant under r, scaling and reflection")
{
    for (const auto& m : {families::brownian(), families::hybrid(), families::double_power_tail(), families::mirrored_hybrid()}) {
        for (Side s : {Side::left, Side::right}) {
            const auto v1 = first_moment_tail(m, -1.3, s).verdict;
            CHECK(first_moment_tail(m, 0.2, s).verdict == v1);
            CHECK(first_moment_tail(m, 4.0, s).verdict == v1);
            CHECK(first_moment_tail(m.scaled(3.5), 0.2, s).verdict == v1);
            CHECK(first_moment_tail(m.reflected(), 1.3, opposite(s)).verdict == v1);
        }
    }
    const auto ib = families::inverse_bessel();
    CHECK(*first_moment_tail(ib.scaled(3.0), 2.0, Side::right).value ==
          doctest::Approx(3.0 * *first_moment_tail(ib, 2.0, Side::right).value));
}

TEST_CASE("descriptor validation")
{
    CHECK_THROWS_WITH_AS(build_measure({{"family", "constant"}, {"interval", {0.0, "inf"}}, {"density", -1.0}}),
                         doctest::Contains("negative density parameter"), InvalidArgument);
    CHECK_THROWS_WITH_AS(build_measure({{"family", "constant"},
                                        {"interval", {0.0, "inf"}},
                                        {"density", 1.0},
                                        {"atoms", {{-1.0, 1.0}}}}),
                         doctest::Contains("outside the interval"), InvalidArgument);
    CHECK_THROWS_WITH_AS(build_measure({{"family", "hybrid"},
                                        {"interval", {0.0, "inf"}},
                                        {"knee", -2.0},
                                        {"left", {{"family", "constant"}, {"density", 2.0}}},
                                        {"right", {{"family", "constant"}, {"density", 2.0}}}}),
                         doctest::Contains("knee outside interval"), InvalidArgument);
    CHECK_THROWS_AS(build_measure({{"family", "constant"}, {"interval", {0.0, "inf"}}, {"density", 1.0}, {"bogus", 1}}),
                    InvalidArgument);
    CHECK_THROWS_AS(build_measure({{"family", "nope"}, {"interval", {0.0, 1.0}}}), InvalidArgument);
}

TEST_CASE("tabulated tails: declared, extrapolated, refused")
{
    std::vector<double> xs, rs;
    for (double x = 1.0; x <= 1000.0; x *= 1.5) {
        xs.push_back(x);
        rs.push_back(2.0 * std::pow(x, -4.0));
    }
    const auto fitted = build_measure({{"family", "tabulated"}, {"interval", {0.5, "inf"}}, {"x", xs}, {"density", rs}});
    const auto t = first_moment_tail(fitted, 2.0, Side::right);
    CHECK(t.verdict == TailVerdict::finite);
    CHECK(t.provenance == TailProvenance::extrapolated);

    std::vector<double> rs2;
    for (double x : xs) rs2.push_back(2.0 / x);
    const auto heavy = build_measure({{"family", "tabulated"}, {"interval", {0.5, "inf"}}, {"x", xs}, {"density", rs2}});
    CHECK(first_moment_tail(heavy, 2.0, Side::right).verdict == TailVerdict::infinite);

    const auto short_table = build_measure(
        {{"family", "tabulated"}, {"interval", {0.5, "inf"}}, {"x", {1.0, 2.0, 3.0}}, {"density", {1.0, 0.5, 0.3}}});
    CHECK_THROWS_AS(first_moment_tail(short_table, 2.0, Side::right), RefusedVerdict);

    const auto declared = build_measure({{"family", "tabulated"},
                                         {"interval", {0.5, "inf"}},
                                         {"x", {1.0, 2.0, 3.0}},
                                         {"density", {1.0, 0.5, 0.3}},
                                         {"tail_exponent", 3.0}});
    const auto d = first_moment_tail(declared, 2.0, Side::right);
    CHECK(d.verdict == TailVerdict::finite);
    CHECK(d.provenance == TailProvenance::declared_analytic);
}

TEST_CASE("tail helpers match quadrature")
{
    const auto ib = families::inverse_bessel();
    // int_R^inf 2 y^-4 dy = (2/3) R^-3; int_R^inf (y - R) 2 y^-4 dy = R^-2 / 3.
    for (double R : {1.0, 4.0}) {
        CHECK(tail_mass(ib, R, Side::right) == doctest::Approx(2.0 / (3.0 * R * R * R)));
        CHECK(tail_distance_moment(ib, R, Side::right) == doctest::Approx(1.0 / (3.0 * R * R)));
    }
}

TEST_CASE("expansion point")
{
    CHECK(families::brownian().expansion_point() == 0.0);
    CHECK(families::inverse_bessel().expansion_point() == 1.0);
    CHECK(build_measure({{"family", "constant"}, {"interval", {2.0, 4.0}}, {"density", 1.0}}).expansion_point() == 3.0);
}
