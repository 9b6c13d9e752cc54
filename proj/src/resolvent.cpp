#include "natscale/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <boost/math/special_functions/factorials.hpp>

#include "natscale/error.hpp"

namespace natscale {

namespace {

void require_in_window(const EigenPair& p, double x, const char* what)
{
    const auto w = p.f_minus.window();
    if (!(x >= w.lo && x <= w.hi)) throw InvalidArgument(std::string(what) + ": point outside the eigenpair window");
}

void require_case_i(const EigenPair& p, const char* what)
{
    if (!p.interval.lo_finite())
        throw InvalidArgument(std::string(what) +
                              ": requires a finite left end (l- = -inf is the conjectured regime, not supported)");
}

// Value at 0 of the polynomial through (u_i, v_i).
double extrapolate_to_zero(std::span<const double> u, std::span<const double> v)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double l = 1.0;
        for (std::size_t j = 0; j < u.size(); ++j)
            if (j != i) l *= (0.0 - u[j]) / (u[i] - u[j]);
        acc += l * v[i];
    }
    return acc;
}

}  // namespace

double green(const EigenPair& pair, double x, double y)
{
    require_in_window(pair, x, "green");
    require_in_window(pair, y, "green");
    const double lo = std::min(x, y), hi = std::max(x, y);
    return pair.f_minus.value_at(lo) * pair.f_plus.value_at(hi) / pair.wronskian_h;
}

double martingale_defect(const EigenPair& pair, double x)
{
    require_case_i(pair, "martingale_defect");
    require_in_window(pair, x, "martingale_defect");
    return pair.alpha_plus * pair.f_minus.value_at(x) / pair.wronskian_h;
}

double stopped_mean_laplace(const EigenPair& pair, double x)
{
    require_case_i(pair, "stopped_mean_laplace");
    const double d = martingale_defect(pair, x);
    const double v = (x - pair.interval.lo - d) / pair.lambda;
    return std::max(v, 0.0);
}

TauberianResult tauberian_limit(std::vector<TauberianSample> samples, const TauberianOptions& opts)
{
    if (opts.degree < 1) throw InvalidArgument("tauberian_limit: degree must be at least 1");
    const std::size_t need = std::max<std::size_t>(4, static_cast<std::size_t>(opts.degree) + 2);
    if (samples.size() < need) throw InvalidArgument("tauberian_limit: too few samples");
    for (const auto& s : samples)
        if (!(s.lambda > 0.0) || !std::isfinite(s.transform))
            throw InvalidArgument("tauberian_limit: samples need lambda > 0 and finite transforms");
    std::sort(samples.begin(), samples.end(), [](auto& a, auto& b) { return a.lambda > b.lambda; });
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (samples[i].lambda == samples[i - 1].lambda) throw InvalidArgument("tauberian_limit: repeated lambda");
    if (samples.front().lambda < 100.0 * samples.back().lambda)
        throw InvalidArgument("tauberian_limit: samples must span two decades in lambda");

    std::vector<double> u, v;
    for (const auto& s : samples) {
        u.push_back(opts.sqrt_variable ? std::sqrt(s.lambda) : s.lambda);
        v.push_back(s.lambda * s.transform);
    }
    const std::size_t n = u.size(), d = static_cast<std::size_t>(opts.degree);
    auto tail = [&](std::size_t end, std::size_t k) {
        return extrapolate_to_zero(std::span(u).subspan(end - k, k), std::span(v).subspan(end - k, k));
    };
    const double limit = tail(n, d + 1);
    const double lower = tail(n, d);
    const double shifted = tail(n - 1, d + 1);
    const double scale = std::max(opts.cauchy_abs, opts.cauchy_tol * std::abs(limit));
    if (!(std::abs(limit - shifted) <= scale))
        throw ConvergenceError("tauberian_limit: extrapolants not Cauchy across the last two samples (" +
                               std::to_string(shifted) + " vs " + std::to_string(limit) + ")");
    return {limit, std::abs(limit - lower)};
}

double stehfest_invert(const std::function<double(double)>& transform, double t, int terms)
{
    if (!(t > 0.0)) throw InvalidArgument("stehfest_invert: t must be positive");
    if (terms < 2 || terms % 2 != 0 || terms > 20) throw InvalidArgument("stehfest_invert: terms must be even, <= 20");
    using boost::math::factorial;
    const int half = terms / 2;
    const double ln2t = std::log(2.0) / t;
    double acc = 0.0;
    for (int k = 1; k <= terms; ++k) {
        double vk = 0.0;
        for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
            vk += std::pow(j, half) * factorial<double>(2 * j) /
                  (factorial<double>(half - j) * factorial<double>(j) * factorial<double>(j - 1) *
                   factorial<double>(k - j) * factorial<double>(2 * j - k));
        }
        if ((k + half) % 2) vk = -vk;
        acc += vk * transform(k * ln2t);
    }
    return acc * ln2t;
}

double stopped_mean_at(const SpeedMeasure& m, double x, double t, const EigenOptions& opts, int terms)
{
    const auto& iv = m.interval();
    if (!iv.lo_finite()) throw InvalidArgument("stopped_mean_at: requires a finite left end");
    if (!iv.contains(x)) throw InvalidArgument("stopped_mean_at: x outside the interval");
    EigenOptions o = opts;
    o.ladder_tol = std::min(o.ladder_tol, 1e-10);
    const double lo = iv.lo + 0.5 * (x - iv.lo);
    double hi = x + std::max(1.0, std::abs(x));
    if (iv.hi_finite()) hi = std::min(hi, x + 0.5 * (iv.hi - x));
    auto F = [&](double s) { return stopped_mean_laplace(solve_pair(m, s, {lo, hi}, o), x); };
    return iv.lo + stehfest_invert(F, t, terms);
}

DefectCurve defect_curve(const SpeedMeasure& m, double x, const DefectOptions& opts)
{
    const auto& iv = m.interval();
    if (!iv.lo_finite())
        throw InvalidArgument("defect_curve: requires a finite left end (l- = -inf is the conjectured regime)");
    if (!iv.contains(x)) throw InvalidArgument("defect_curve: x outside the interval");
    if (opts.count < 4) throw InvalidArgument("defect_curve: need at least 4 lambda values");

    DefectCurve c;
    c.x = x;
    c.target_gap = x - iv.lo;
    const double lo = iv.lo + 0.5 * (x - iv.lo);
    double hi = opts.window_hi > x ? opts.window_hi : x + std::max(1.0, std::abs(x));
    if (iv.hi_finite()) hi = std::min(hi, x + 0.5 * (iv.hi - x));

    std::vector<TauberianSample> samples;
    for (int k = 0; k < opts.count; ++k) {
        const double lam = opts.lambda0 * std::pow(4.0, -k);
        const EigenPair p = solve_pair(m, lam, {lo, hi}, opts.eigen);
        const double d = martingale_defect(p, x);
        c.lambdas.push_back(lam);
        c.defect.push_back(d);
        samples.push_back({lam, stopped_mean_laplace(p, x)});
    }
    c.monotone = true;
    for (std::size_t i = 1; i < c.defect.size(); ++i)
        if (c.defect[i] < c.defect[i - 1] - 1e-12 * std::abs(c.defect[i - 1])) c.monotone = false;

    const auto t = tauberian_limit(samples, opts.tauberian);
    c.extrapolated_limit = c.target_gap - t.limit;
    c.extrapolation_error = t.error;
    c.reaches_gap = std::abs(c.extrapolated_limit - c.target_gap) <= std::max(1e-4, 3.0 * t.error);
    return c;
}

void write_csv(const DefectCurve& c, std::ostream& os)
{
    os << std::setprecision(17) << "lambda,defect,target_gap\n";
    for (std::size_t i = 0; i < c.lambdas.size(); ++i)
        os << c.lambdas[i] << "," << c.defect[i] << "," << c.target_gap << "\n";
}

}  // namespace natscale
