#include "natscale/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <Eigen/Dense>

#include "natscale/error.hpp"

namespace natscale {

std::string to_string(Normalization n)
{
    switch (n) {
    case Normalization::f_minus_vanishing_at_l_minus: return "f_minus_vanishing_at_l_minus";
    case Normalization::f_plus_vanishing_at_l_plus: return "f_plus_vanishing_at_l_plus";
    case Normalization::alpha_plus_one: return "alpha_plus_one";
    case Normalization::alpha_minus_one: return "alpha_minus_one";
    case Normalization::unit_at_origin: return "unit_at_origin";
    case Normalization::initial_value: return "initial_value";
    case Normalization::killed: return "killed";
    }
    return "?";
}

std::string to_string(Monotonicity m)
{
    switch (m) {
    case Monotonicity::increasing: return "increasing";
    case Monotonicity::decreasing: return "decreasing";
    case Monotonicity::none: return "none";
    }
    return "?";
}

std::string to_string(LimitKind k)
{
    switch (k) {
    case LimitKind::zero: return "zero";
    case LimitKind::positive: return "positive";
    case LimitKind::diverges: return "diverges";
    case LimitKind::bounded: return "bounded";
    case LimitKind::indeterminate: return "indeterminate";
    case LimitKind::not_applicable: return "not-applicable";
    }
    return "?";
}

// ------------------------------------------------------------ Eigenfunction --

double Eigenfunction::value_at(double x) const
{
    if (x < grid.lo() || x > grid.hi()) throw InvalidArgument("eigenfunction evaluated outside its window");
    return grid.interpolate(values, x);
}

double Eigenfunction::derivative_at(double x) const
{
    if (x < grid.lo() || x > grid.hi()) throw InvalidArgument("eigenfunction evaluated outside its window");
    if (derivative_jump.empty()) return grid.interpolate(right_derivative, x);
    // The panel's own (continuous) derivative at its right end is the left limit.
    std::vector<double> left(right_derivative.size());
    for (std::size_t i = 0; i < left.size(); ++i) left[i] = right_derivative[i] - derivative_jump[i];
    return grid.interpolate(right_derivative, x, left);
}

namespace {

Normalization reflect_tag(Normalization n)
{
    switch (n) {
    case Normalization::f_minus_vanishing_at_l_minus: return Normalization::f_plus_vanishing_at_l_plus;
    case Normalization::f_plus_vanishing_at_l_plus: return Normalization::f_minus_vanishing_at_l_minus;
    case Normalization::alpha_plus_one: return Normalization::alpha_minus_one;
    case Normalization::alpha_minus_one: return Normalization::alpha_plus_one;
    default: return n;
    }
}

}  // namespace

Eigenfunction Eigenfunction::reflected() const
{
    Eigenfunction r;
    r.lambda = lambda;
    r.grid = grid.mirrored();
    const std::size_t n = values.size();
    r.values.resize(n);
    r.right_derivative.resize(n);
    if (!derivative_jump.empty()) r.derivative_jump.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = n - 1 - i;
        const double jump = derivative_jump.empty() ? 0.0 : derivative_jump[j];
        r.values[i] = values[j];
        r.right_derivative[i] = -(right_derivative[j] - jump);
        if (!derivative_jump.empty()) r.derivative_jump[i] = jump;
    }
    r.monotonicity = monotonicity == Monotonicity::increasing   ? Monotonicity::decreasing
                     : monotonicity == Monotonicity::decreasing ? Monotonicity::increasing
                                                                : Monotonicity::none;
    r.normalization = reflect_tag(normalization);
    r.x0 = -x0;
    return r;
}

Eigenfunction Eigenfunction::scaled(double c) const
{
    Eigenfunction r = *this;
    for (auto& v : r.values) v *= c;
    for (auto& v : r.right_derivative) v *= c;
    for (auto& v : r.derivative_jump) v *= c;
    return r;
}

// --------------------------------------------------------------- numerics --

namespace {

constexpr std::size_t kMaxPanels = std::size_t{1} << 21;
constexpr double kRescaleAt = 1e200;

using PanelMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 20, 20>;
using PanelVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 20, 1>;

double atom_mass_at(const SpeedMeasure& m, double x)
{
    for (const auto& a : m.atoms())
        if (a.position == x) return a.mass;
    return 0.0;
}

// Density at every node, one-sided at panel ends so each panel sees the
// smooth branch of a piecewise density.
std::vector<double> panel_densities(const SpeedMeasure& m, const PanelGrid& g)
{
    const int n = g.order();
    std::vector<double> rho(g.panels() * n);
    const auto& nodes = g.nodes();
    const auto& br = g.breaks();
    for (std::size_t k = 0; k < g.panels(); ++k) {
        const std::size_t first = g.panel_first(k);
        for (int j = 0; j < n; ++j) {
            double x = nodes[first + j];
            if (j == 0) x = std::nextafter(br[k], br[k + 1]);
            if (j == n - 1) x = std::nextafter(br[k + 1], br[k]);
            rho[k * n + j] = m.density(x);
        }
    }
    return rho;
}

struct March {
    std::vector<double> f, df, jump;
    // Stored values are the true solution times exp(-log_scale).
    double log_scale = 0.0;
    bool any_jump = false;
};

// Integrates f'' = lambda rho f, with derivative jumps lambda mu f at atoms,
// panel by panel. Forward marches start at the left end from (f, right
// derivative); backward marches start at the right end from (f, left
// derivative). Each panel is a dense collocation solve of the Volterra form.
March march(const SpeedMeasure& m, double lambda, const PanelGrid& g, bool forward, double f0, double df0)
{
    const int n = g.order();
    const auto& rule = PanelRule::get(n);
    const double* K1 = forward ? rule.from_left() : rule.from_right();
    const double* K2 = forward ? rule.from_left_sq() : rule.from_right_sq();
    const auto rho = panel_densities(m, g);
    const auto& nodes = g.nodes();
    const auto& br = g.breaks();
    const std::size_t N = g.size(), P = g.panels();

    March out;
    out.f.assign(N, 0.0);
    out.df.assign(N, 0.0);
    out.jump.assign(N, 0.0);
    if (forward) {
        out.f[0] = f0;
        out.df[0] = df0;
    } else {
        out.f[N - 1] = f0;
        out.df[N - 1] = df0;
    }

    double fs = f0, dfs = df0;
    PanelMatrix A(n, n);
    PanelVector rhs(n);
    for (std::size_t step = 0; step < P; ++step) {
        const std::size_t k = forward ? step : P - 1 - step;
        const std::size_t first = g.panel_first(k);
        const double a = br[k], b = br[k + 1];
        const double half = 0.5 * (b - a);
        const double xs = forward ? a : b;
        const double* r = &rho[k * n];
        for (int j = 0; j < n; ++j) {
            const double xj = j == 0 ? a : (j == n - 1 ? b : nodes[first + j]);
            for (int i = 0; i < n; ++i) A(j, i) = (i == j ? 1.0 : 0.0) - lambda * half * half * K2[j * n + i] * r[i];
            rhs(j) = fs + dfs * (xj - xs);
        }
        const PanelVector sol = A.partialPivLu().solve(rhs);
        double d[20];
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += K1[j * n + i] * r[i] * sol(i);
            d[j] = forward ? dfs + lambda * half * acc : dfs - lambda * half * acc;
        }
        if (forward) {
            for (int j = 1; j < n; ++j) {
                out.f[first + j] = sol(j);
                out.df[first + j] = d[j];
            }
            const std::size_t ib = first + n - 1;
            const double mu = atom_mass_at(m, b);
            if (mu > 0.0) {
                out.jump[ib] = lambda * mu * sol(n - 1);
                out.df[ib] += out.jump[ib];
                out.any_jump = true;
            }
            fs = out.f[ib];
            dfs = out.df[ib];
        } else {
            for (int j = 0; j < n - 1; ++j) {
                out.f[first + j] = sol(j);
                out.df[first + j] = d[j];
            }
            const double mu = atom_mass_at(m, a);
            double left = d[0];
            if (mu > 0.0) {
                out.jump[first] = lambda * mu * sol(0);
                left -= out.jump[first];
                out.any_jump = true;
            }
            fs = sol(0);
            dfs = left;
        }
        if (std::abs(fs) > kRescaleAt || std::abs(dfs) > kRescaleAt) {
            const double s = 1.0 / kRescaleAt;
            for (std::size_t i = 0; i < N; ++i) {
                out.f[i] *= s;
                out.df[i] *= s;
                out.jump[i] *= s;
            }
            fs *= s;
            dfs *= s;
            out.log_scale += std::log(kRescaleAt);
        }
    }
    return out;
}

double sup_relative_change(const std::vector<double>& now, const std::vector<double>& before)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < now.size(); ++i) {
        const double den = std::abs(now[i]);
        if (den == 0.0) return kInf;
        worst = std::max(worst, std::abs(now[i] - before[i]) / den);
    }
    return worst;
}

struct Solved {
    Eigenfunction f;
    double truncation;
};

// Positive increasing solution on the window grid: vanishing at a finite l-,
// recessive at l- = -inf (killed far out), or the g-type solution tending to
// 1 at -inf when the left tail moment is finite.
Solved solve_increasing(const SpeedMeasure& m, double lambda, const PanelGrid& win, double x0,
                        const EigenOptions& opts)
{
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be positive");
    const auto& iv = m.interval();
    const double lo = win.lo();

    auto run = [&](double start, double f0, double df0) {
        double f = f0, df = df0, shift = 0.0;
        if (start < lo) {
            const PanelGrid ext = make_grid(m, lambda, start, lo, opts, 0);
            March e = march(m, lambda, ext, true, f0, df0);
            f = e.f.back();
            df = e.df.back();
            shift = e.log_scale;
        }
        March w = march(m, lambda, win, true, f, df);
        w.log_scale += shift;
        return w;
    };

    Normalization tag;
    bool normalize = true;
    March result;
    double truncation = lo;

    auto ladder = [&](auto&& start_of, auto&& init) {
        std::vector<double> prev;
        for (int k = 0; k <= opts.ladder_max; ++k) {
            const double T = start_of(k);
            const auto [f0, df0] = init(T);
            March cur = run(T, f0, df0);
            std::vector<double> v = cur.f;
            if (normalize) {
                const double c = win.interpolate(cur.f, x0);
                for (auto& x : v) x /= c;
            }
            if (!prev.empty() && sup_relative_change(v, prev) < opts.ladder_tol) {
                result = std::move(cur);
                truncation = T;
                return;
            }
            prev = std::move(v);
        }
        throw ConvergenceError("truncation ladder did not converge for the increasing solution (lambda=" +
                               std::to_string(lambda) + ")");
    };

    if (iv.lo_finite()) {
        tag = Normalization::f_minus_vanishing_at_l_minus;
        if (std::isfinite(m.density(iv.lo))) {
            result = run(iv.lo, 0.0, 1.0);
            truncation = iv.lo;
        } else {
            ladder([&](int k) { return iv.lo + (lo - iv.lo) * std::ldexp(1.0, -(k + 1)); },
                   [](double) { return std::pair{0.0, 1.0}; });
        }
    } else {
        const double s = std::max(1.0, win.hi() - lo);
        auto start_of = [&](int k) { return lo - s * std::ldexp(1.0, k); };
        if (m.tail(Side::left).verdict == TailVerdict::finite) {
            tag = Normalization::alpha_minus_one;
            normalize = false;
            ladder(start_of, [&](double T) {
                return std::pair{1.0 + lambda * tail_distance_moment(m, T, Side::left),
                                 lambda * tail_mass(m, T, Side::left)};
            });
        } else {
            tag = Normalization::unit_at_origin;
            ladder(start_of, [](double) { return std::pair{0.0, 1.0}; });
        }
    }

    Eigenfunction f;
    f.lambda = lambda;
    f.grid = win;
    f.values = std::move(result.f);
    f.right_derivative = std::move(result.df);
    if (result.any_jump) f.derivative_jump = std::move(result.jump);
    f.monotonicity = Monotonicity::increasing;
    f.normalization = tag;
    f.x0 = x0;
    if (normalize) {
        f = f.scaled(1.0 / win.interpolate(f.values, x0));
    } else if (result.log_scale != 0.0) {
        throw ConvergenceError("g-type solution overflowed");
    }
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        if (!(f.values[i] > 0.0) || !std::isfinite(f.values[i]))
            throw ConvergenceError("increasing solution lost positivity (quadrature failure)");
        if (i > 0 && f.values[i] < f.values[i - 1] - 1e-9 * std::abs(f.values[i - 1]))
            throw ConvergenceError("increasing solution is not monotone (quadrature failure)");
    }
    return {std::move(f), truncation};
}

void check_window(const SpeedMeasure& m, Window w)
{
    const auto& iv = m.interval();
    if (!(w.lo < w.hi)) throw InvalidArgument("window requires lo < hi");
    if (!iv.contains(w.lo) || !iv.contains(w.hi)) throw InvalidArgument("window must lie inside the open interval");
}

PanelGrid solver_grid(const SpeedMeasure& m, double lambda, Window w, const EigenOptions& opts)
{
    check_window(m, w);
    const double x0 = m.expansion_point();
    const double lo = std::min(w.lo, x0), hi = std::max(w.hi, x0);
    const double extra[] = {x0};
    return make_grid(m, lambda, lo, hi, opts, opts.points_per_window, extra);
}

Solved solve_decreasing(const SpeedMeasure& m, double lambda, const PanelGrid& grid, const EigenOptions& opts)
{
    const SpeedMeasure r = m.reflected();
    Solved s = solve_increasing(r, lambda, grid.mirrored(), -m.expansion_point(), opts);
    return {s.f.reflected(), -s.truncation};
}

}  // namespace

PanelGrid make_grid(const SpeedMeasure& m, double lambda, double lo, double hi, const EigenOptions& opts,
                    int min_points, std::span<const double> extra_breaks)
{
    if (!(lo < hi)) throw InvalidArgument("make_grid requires lo < hi");
    const auto& iv = m.interval();
    std::vector<double> forced{lo, hi};
    for (double k : m.knots())
        if (k > lo && k < hi) forced.push_back(k);
    for (const auto& a : m.atoms())
        if (a.position > lo && a.position < hi) forced.push_back(a.position);
    for (double e : extra_breaks)
        if (e > lo && e < hi) forced.push_back(e);
    std::sort(forced.begin(), forced.end());
    forced.erase(std::unique(forced.begin(), forced.end()), forced.end());

    const double cap = min_points > 1 ? (hi - lo) * (opts.panel_order - 1) / (min_points - 1) : kInf;
    // Grade toward an end only where the density blows up there.
    auto singular = [&](double end) { return !std::isfinite(m.density(end)); };
    const bool grade_lo = iv.lo_finite() && singular(iv.lo);
    const bool grade_hi = iv.hi_finite() && singular(iv.hi);
    auto width = [&](double x) {
        double s = std::max(1.0, std::abs(x));
        if (grade_lo && x > iv.lo) s = std::min(s, x - iv.lo);
        if (grade_hi && x < iv.hi) s = std::min(s, iv.hi - x);
        double w = std::min(cap, opts.geometric * s);
        const double lr = lambda * m.density(x);
        if (lr > 0.0) w = std::min(w, opts.resolution / std::sqrt(lr));
        return w;
    };

    std::vector<double> breaks{forced.front()};
    for (std::size_t s = 0; s + 1 < forced.size(); ++s) {
        const double u = forced[s], v = forced[s + 1];
        double x = u;
        while (x < v) {
            double h = width(x);
            for (int it = 0; it < 64; ++it) {
                const double h2 = std::min(h, width(std::min(x + h, v)));
                if (h2 >= h) break;
                h = h2;
            }
            if (!(h > 0.0) || !std::isfinite(h)) throw ConvergenceError("grid sizing failed (density not finite)");
            if (x + h >= v) {
                x = v;
            } else {
                if (v - x - h < 0.25 * h) h = 0.5 * (v - x);
                x += h;
            }
            breaks.push_back(x);
            if (breaks.size() > kMaxPanels) throw ConvergenceError("grid needs too many panels; truncation too far out");
        }
    }
    return PanelGrid(std::move(breaks), opts.panel_order);
}

// -------------------------------------------------------------- Picard --

namespace {

// Given samples of g, returns T(x) = integral over (x0, x] of (x - y) g(y) m(dy)
// and its right derivative (signed integral of g dm from x0), on the grid.
void picard_step(const SpeedMeasure& m, const PanelGrid& grid, const std::vector<double>& rho, std::size_t p0,
                 const std::vector<double>& g, std::vector<double>& val, std::vector<double>& der,
                 std::vector<double>& jump)
{
    const int n = grid.order();
    const auto& rule = PanelRule::get(n);
    const double* S = rule.from_left();
    const double* R = rule.from_right();
    const auto& br = grid.breaks();
    const std::size_t N = grid.size(), P = grid.panels();
    val.assign(N, 0.0);
    der.assign(N, 0.0);
    jump.assign(N, 0.0);
    double gk[20], D[20];

    // Right of x0.
    double Da = 0.0, Ta = 0.0;
    for (std::size_t k = p0; k < P; ++k) {
        const std::size_t first = grid.panel_first(k);
        const double half = 0.5 * (br[k + 1] - br[k]);
        for (int i = 0; i < n; ++i) gk[i] = rho[k * n + i] * g[first + i];
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += S[j * n + i] * gk[i];
            D[j] = Da + half * acc;
        }
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += S[j * n + i] * D[i];
            val[first + j] = Ta + half * acc;
            if (j > 0) der[first + j] = D[j];
        }
        const std::size_t ib = first + n - 1;
        const double mu = atom_mass_at(m, br[k + 1]);
        if (mu > 0.0) {
            jump[ib] = mu * g[ib];
            der[ib] += jump[ib];
        }
        Da = der[ib];
        Ta = val[ib];
    }

    // Left of x0: the right derivative vanishes at x0, so the left limit
    // there is minus any atom sitting on x0.
    const std::size_t i0 = grid.panel_first(p0);
    const double mu0 = atom_mass_at(m, br[p0]);
    if (mu0 > 0.0) jump[i0] = mu0 * g[i0];
    double Db = -jump[i0], Tb = 0.0;
    for (std::size_t kk = p0; kk-- > 0;) {
        const std::size_t first = grid.panel_first(kk);
        const double half = 0.5 * (br[kk + 1] - br[kk]);
        for (int i = 0; i < n; ++i) gk[i] = rho[kk * n + i] * g[first + i];
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += R[j * n + i] * gk[i];
            D[j] = Db - half * acc;
        }
        for (int j = 0; j < n - 1; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += R[j * n + i] * D[i];
            val[first + j] = Tb - half * acc;
            der[first + j] = D[j];
        }
        const double mu = atom_mass_at(m, br[kk]);
        double left = D[0];
        if (mu > 0.0) {
            jump[first] = mu * g[first];
            left -= jump[first];
        }
        Db = left;
        Tb = val[first];
    }
}

PanelGrid picard_grid(const SpeedMeasure& m, Window w, const EigenOptions& opts, std::size_t& p0)
{
    check_window(m, w);
    const double x0 = m.expansion_point();
    if (!(x0 >= w.lo && x0 <= w.hi))
        throw InvalidArgument("picard_basis: window must contain the expansion point " + std::to_string(x0));
    const double extra[] = {x0};
    PanelGrid g = make_grid(m, 0.0, w.lo, w.hi, opts, opts.points_per_window, extra);
    const auto& br = g.breaks();
    p0 = static_cast<std::size_t>(std::lower_bound(br.begin(), br.end(), x0) - br.begin());
    return g;
}

double sup_abs(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

}  // namespace

PicardTerms picard_terms(const SpeedMeasure& m, Window window, int count, const EigenOptions& opts)
{
    std::size_t p0 = 0;
    PicardTerms t;
    t.grid = picard_grid(m, window, opts, p0);
    const double x0 = m.expansion_point();
    const auto rho = panel_densities(m, t.grid);
    std::vector<double> phi(t.grid.size(), 1.0), psi(t.grid.size());
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = t.grid.nodes()[i] - x0;
    std::vector<double> der, jump;
    for (int n = 0; n < count; ++n) {
        t.phi.push_back(phi);
        t.psi.push_back(psi);
        std::vector<double> next;
        picard_step(m, t.grid, rho, p0, phi, next, der, jump);
        phi = std::move(next);
        picard_step(m, t.grid, rho, p0, psi, next, der, jump);
        psi = std::move(next);
    }
    return t;
}

std::pair<Eigenfunction, Eigenfunction> picard_basis(const SpeedMeasure& m, double lambda, Window window,
                                                     double tol, const EigenOptions& opts)
{
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
    if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
    std::size_t p0 = 0;
    const PanelGrid grid = picard_grid(m, window, opts, p0);
    const double x0 = m.expansion_point();
    const auto rho = panel_densities(m, grid);
    const std::size_t N = grid.size();

    struct Series {
        std::vector<double> term, val, der, jump;
    };
    Series phi{std::vector<double>(N, 1.0), std::vector<double>(N, 1.0), std::vector<double>(N, 0.0),
               std::vector<double>(N, 0.0)};
    Series psi{std::vector<double>(N), std::vector<double>(N), std::vector<double>(N, 1.0),
               std::vector<double>(N, 0.0)};
    for (std::size_t i = 0; i < N; ++i) psi.term[i] = psi.val[i] = grid.nodes()[i] - x0;

    std::vector<double> tv, td, tj;
    bool done = false;
    double lam_n = 1.0;
    for (int n = 1; n <= opts.picard_max_terms && !done; ++n) {
        lam_n *= lambda;
        double worst = 0.0;
        for (Series* s : {&phi, &psi}) {
            picard_step(m, grid, rho, p0, s->term, tv, td, tj);
            s->term = tv;
            for (std::size_t i = 0; i < N; ++i) {
                s->val[i] += lam_n * tv[i];
                s->der[i] += lam_n * td[i];
                s->jump[i] += lam_n * tj[i];
            }
            worst = std::max(worst, lam_n * sup_abs(tv));
        }
        if (!std::isfinite(worst) || worst > 1e300) throw ConvergenceError("picard_basis: series terms overflowed");
        done = worst < tol;
    }
    if (!done)
        throw ConvergenceError("picard_basis: series terms not decaying within " +
                               std::to_string(opts.picard_max_terms) + " terms (window too wide for lambda)");

    auto make = [&](Series& s, Monotonicity mono) {
        Eigenfunction f;
        f.lambda = lambda;
        f.grid = grid;
        f.values = std::move(s.val);
        f.right_derivative = std::move(s.der);
        if (m.has_atoms()) f.derivative_jump = std::move(s.jump);
        f.monotonicity = mono;
        f.normalization = Normalization::initial_value;
        f.x0 = x0;
        return f;
    };
    return {make(phi, Monotonicity::none), make(psi, Monotonicity::increasing)};
}

// -------------------------------------------------------------- solvers --

Eigenfunction solve_f_minus(const SpeedMeasure& m, double lambda, Window window, const EigenOptions& opts)
{
    const PanelGrid grid = solver_grid(m, lambda, window, opts);
    return solve_increasing(m, lambda, grid, m.expansion_point(), opts).f;
}

Eigenfunction solve_f_plus(const SpeedMeasure& m, double lambda, Window window, const EigenOptions& opts)
{
    const PanelGrid grid = solver_grid(m, lambda, window, opts);
    return solve_decreasing(m, lambda, grid, opts).f;
}

EigenPair solve_pair(const SpeedMeasure& m, double lambda, Window window, const EigenOptions& opts)
{
    const PanelGrid grid = solver_grid(m, lambda, window, opts);
    Solved lo = solve_increasing(m, lambda, grid, m.expansion_point(), opts);
    Solved hi = solve_decreasing(m, lambda, grid, opts);

    EigenPair p;
    p.lambda = lambda;
    p.interval = m.interval();
    p.truncation_window = {lo.truncation, hi.truncation};
    p.f_minus = std::move(lo.f);
    p.f_plus = std::move(hi.f);
    const auto w = wronskian(p.f_minus, p.f_plus);
    p.wronskian_h = w.h;
    p.wronskian_deviation = w.max_relative_deviation;
    switch (p.f_plus.normalization) {
    case Normalization::alpha_plus_one: p.alpha_plus = 1.0; break;
    case Normalization::f_plus_vanishing_at_l_plus: p.alpha_plus = 0.0; break;
    default:
        if (m.tail(Side::right).verdict == TailVerdict::undeclared) {
            // No flag to lean on: use the flag-free estimate, rescaled to f_+.
            const auto est = estimate_alpha_plus(m, lambda, opts);
            p.alpha_plus = est.kind == LimitKind::zero ? 0.0 : est.value * p.f_plus.value_at(p.f_plus.x0);
        } else {
            p.alpha_plus = 0.0;
        }
    }
    return p;
}

WronskianResult wronskian(const Eigenfunction& fm, const Eigenfunction& fp)
{
    if (fm.lambda != fp.lambda) throw InvalidArgument("wronskian: eigenfunctions must share lambda");
    if (fm.grid.size() != fp.grid.size() || fm.grid.lo() != fp.grid.lo() || fm.grid.hi() != fp.grid.hi())
        throw InvalidArgument("wronskian: eigenfunctions must share a grid");
    const std::size_t n = fm.values.size();
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i)
        h[i] = fp.values[i] * fm.right_derivative[i] - fm.values[i] * fp.right_derivative[i];
    std::vector<double> sorted = h;
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    const double med = sorted[n / 2];
    if (!(med > 0.0)) throw ConvergenceError("wronskian: non-positive value (inconsistent solutions)");
    double dev = 0.0;
    for (double v : h) dev = std::max(dev, std::abs(v - med) / med);
    if (dev > 1e-4)
        throw ConvergenceError("wronskian: relative deviation " + std::to_string(dev) +
                               " across the grid exceeds 1e-4 (inconsistent solutions)");
    return {med, dev};
}

Eigenfunction killed_f_minus(const EigenPair& pair, double z)
{
    const auto& fm = pair.f_minus;
    const auto& fp = pair.f_plus;
    if (!(z >= fm.grid.lo() && z < fm.grid.hi())) throw InvalidArgument("killed_f_minus: z outside the pair window");
    const double fpz = fp.value_at(z);
    if (!(fpz > 0.0)) throw ConvergenceError("killed_f_minus: f_plus(z) is not positive");
    const double c = fm.value_at(z) / fpz;

    const auto& br = fm.grid.breaks();
    std::vector<double> breaks{z};
    const double tiny = 1e-12 * std::max(1.0, std::abs(z));
    for (double b : br)
        if (b > z + tiny) breaks.push_back(b);
    if (breaks.size() < 2) breaks.push_back(fm.grid.hi());

    Eigenfunction k;
    k.lambda = fm.lambda;
    k.grid = PanelGrid(std::move(breaks), fm.grid.order());
    k.monotonicity = Monotonicity::increasing;
    k.normalization = Normalization::killed;
    k.x0 = fm.x0;
    const auto& xs = k.grid.nodes();
    k.values.resize(xs.size());
    k.right_derivative.resize(xs.size());
    const bool jumps = !fm.derivative_jump.empty() || !fp.derivative_jump.empty();
    if (jumps) k.derivative_jump.assign(xs.size(), 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        k.values[i] = fm.value_at(xs[i]) - c * fp.value_at(xs[i]);
        k.right_derivative[i] = fm.derivative_at(xs[i]) - c * fp.derivative_at(xs[i]);
        if (jumps) {
            const std::size_t j = fm.grid.boundary_index(xs[i]);
            if (j != PanelGrid::npos) {
                const double jm = fm.derivative_jump.empty() ? 0.0 : fm.derivative_jump[j];
                const double jp = fp.derivative_jump.empty() ? 0.0 : fp.derivative_jump[j];
                k.derivative_jump[i] = jm - c * jp;
            }
        }
    }
    k.values[0] = 0.0;
    return k;
}

double hitting_laplace(const EigenPair& pair, double x, double a)
{
    const auto w = pair.f_minus.window();
    if (!(x >= w.lo && x <= w.hi && a >= w.lo && a <= w.hi))
        throw InvalidArgument("hitting_laplace: points must lie in the pair window");
    if (a == x) return 1.0;
    if (a < x) return pair.f_plus.value_at(x) / pair.f_plus.value_at(a);
    return pair.f_minus.value_at(x) / pair.f_minus.value_at(a);
}

// ------------------------------------------------------------- ladders --

AlphaEstimate estimate_alpha_plus(const SpeedMeasure& m, double lambda, const EigenOptions& opts, double cauchy_tol)
{
    AlphaEstimate est;
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
    if (m.interval().hi_finite()) {
        est.kind = LimitKind::zero;  // f_+ vanishes at a finite l+
        return est;
    }
    const double x0 = m.expansion_point();
    std::vector<double> rich;
    for (int k = 0; k <= opts.ladder_max; ++k) {
        const double dist = std::ldexp(1.0, k);
        const double R = x0 + dist;
        const PanelGrid g = make_grid(m, lambda, x0, R, opts, 0);
        const March mr = march(m, lambda, g, false, 0.0, -1.0);
        const double fx0 = mr.f.front();
        if (!(fx0 > 0.0)) throw ConvergenceError("estimate_alpha_plus: killed solution lost positivity");
        const double a = std::exp(std::log(dist) - std::log(fx0) - mr.log_scale);
        est.ladder.push_back({R, a});
        const std::size_t n = est.ladder.size();
        if (a < 1e-12) {
            est.kind = LimitKind::zero;
            est.value = a;
            return est;
        }
        if (n >= 3 && a < 1e-6) {
            const double r1 = est.ladder[n - 2].value / a, r2 = est.ladder[n - 3].value / est.ladder[n - 2].value;
            if (r1 >= 1.5 && r2 >= 1.5) {
                est.kind = LimitKind::zero;
                est.value = a;
                return est;
            }
        }
        if (n >= 2) rich.push_back(2.0 * a - est.ladder[n - 2].value);
        if (rich.size() >= 2) {
            const double r = rich.back(), rp = rich[rich.size() - 2];
            if (r > 0.0 && std::abs(r - rp) <= cauchy_tol * std::abs(r)) {
                est.kind = LimitKind::positive;
                est.value = r;
                return est;
            }
        }
    }
    est.kind = LimitKind::indeterminate;
    est.value = est.ladder.empty() ? 0.0 : est.ladder.back().value;
    return est;
}

std::vector<LadderPoint> derivative_ladder(const SpeedMeasure& m, double lambda, const EigenOptions& opts,
                                           const std::function<bool(const std::vector<LadderPoint>&)>& stop)
{
    std::vector<LadderPoint> trace;
    if (m.interval().hi_finite()) return trace;
    const double x0 = m.expansion_point();
    const double extra[] = {x0};
    const PanelGrid start = make_grid(m, lambda, x0, x0 + 1.0, opts, 0, extra);
    const Solved s = solve_increasing(m, lambda, start, x0, opts);
    double f = s.f.values.back(), df = s.f.right_derivative.back(), log_scale = 0.0;
    trace.push_back({x0 + 1.0, df});
    if (stop(trace)) return trace;
    for (int k = 1; k <= opts.ladder_max; ++k) {
        const double a = x0 + std::ldexp(1.0, k - 1), b = x0 + std::ldexp(1.0, k);
        const PanelGrid g = make_grid(m, lambda, a, b, opts, 0);
        const March mr = march(m, lambda, g, true, f, df);
        f = mr.f.back();
        df = mr.df.back();
        log_scale += mr.log_scale;
        const double v = log_scale > 0.0 ? df * std::exp(log_scale) : df;
        trace.push_back({b, v});
        if (!std::isfinite(v) || std::abs(v) > 1e300 || stop(trace)) break;
    }
    return trace;
}

void write_csv(const Eigenfunction& f, std::ostream& os)
{
    const auto w = f.window();
    os << "# lambda=" << std::setprecision(17) << f.lambda << ",normalization=" << to_string(f.normalization)
       << ",window=[" << w.lo << "," << w.hi << "]\n";
    os << "x,value,right_derivative\n";
    for (std::size_t i = 0; i < f.values.size(); ++i)
        os << f.x()[i] << "," << f.values[i] << "," << f.right_derivative[i] << "\n";
}

}  // namespace natscale
