#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "natscale/measure.hpp"
#include "natscale/panel.hpp"

namespace natscale {

enum class Monotonicity { increasing, decreasing, none };

enum class Normalization {
    f_minus_vanishing_at_l_minus,  // f(l-) = 0, scaled to 1 at the expansion point
    f_plus_vanishing_at_l_plus,    // f(l+) = 0, scaled to 1 at the expansion point
    alpha_plus_one,                // decreasing solution with f(+inf) = 1
    alpha_minus_one,               // increasing solution with f(-inf) = 1
    unit_at_origin,                // f(x0) = 1 at the expansion point
    initial_value,                 // Picard basis: prescribed value/derivative at x0
    killed,                        // vanishes at an interior point z
};
std::string to_string(Normalization n);
std::string to_string(Monotonicity m);

struct Window {
    double lo;
    double hi;
};

// Positive solution of d/dm d/dx f = lambda f sampled on a panel grid, with
// right derivatives computed from the integral identity rather than finite
// differences.
struct Eigenfunction {
    double lambda = 0.0;
    PanelGrid grid;
    std::vector<double> values;
    std::vector<double> right_derivative;
    // right minus left derivative at each node; empty when the measure has no
    // atoms on the grid.
    std::vector<double> derivative_jump;
    Monotonicity monotonicity = Monotonicity::none;
    Normalization normalization = Normalization::unit_at_origin;
    double x0 = 0.0;

    const std::vector<double>& x() const { return grid.nodes(); }
    Window window() const { return {grid.lo(), grid.hi()}; }
    double value_at(double x) const;
    double derivative_at(double x) const;  // right derivative

    Eigenfunction reflected() const;
    Eigenfunction scaled(double c) const;
};

struct EigenOptions {
    int panel_order = 9;
    // Minimum node count across an evaluation window.
    int points_per_window = 4096;
    // Panel width limits: h * sqrt(lambda * rho) <= resolution, and
    // h <= geometric * (distance to a finite end, or max(1, |x|)).
    double resolution = 0.5;
    double geometric = 0.25;
    // Truncation ladder: successive rungs agreeing to ladder_tol (relative).
    double ladder_tol = 1e-6;
    int ladder_max = 40;
    double picard_tol = 1e-12;
    int picard_max_terms = 400;
};

struct EigenPair {
    Eigenfunction f_minus;
    Eigenfunction f_plus;
    double wronskian_h = 0.0;
    double wronskian_deviation = 0.0;
    double alpha_plus = 0.0;
    double lambda = 0.0;
    Interval interval;
    // Outermost points the two solutions were integrated from.
    Window truncation_window{0.0, 0.0};
};

struct WronskianResult {
    double h;
    double max_relative_deviation;
};

// Panel grid on [lo, hi] honouring the measure's knots, atoms and the
// resolution limits; `min_points` > 0 additionally caps the panel width so the
// grid carries at least that many nodes.
PanelGrid make_grid(const SpeedMeasure& m, double lambda, double lo, double hi, const EigenOptions& opts,
                    int min_points, std::span<const double> extra_breaks = {});

// Successive-approximation basis: phi(x0) = 1, phi'(x0) = 0, psi(x0) = 0,
// psi'(x0) = 1, summed until the last term's sup-norm drops below tol.
std::pair<Eigenfunction, Eigenfunction> picard_basis(const SpeedMeasure& m, double lambda, Window window,
                                                     double tol, const EigenOptions& opts = {});

// The first `count` Picard terms (phi_n, psi_n), n = 0..count-1, on the grid
// used by picard_basis.
struct PicardTerms {
    PanelGrid grid;
    std::vector<std::vector<double>> phi;
    std::vector<std::vector<double>> psi;
};
PicardTerms picard_terms(const SpeedMeasure& m, Window window, int count, const EigenOptions& opts = {});

Eigenfunction solve_f_minus(const SpeedMeasure& m, double lambda, Window window, const EigenOptions& opts = {});
Eigenfunction solve_f_plus(const SpeedMeasure& m, double lambda, Window window, const EigenOptions& opts = {});

// Both solutions on one shared grid, with Wronskian and alpha_plus.
EigenPair solve_pair(const SpeedMeasure& m, double lambda, Window window, const EigenOptions& opts = {});

WronskianResult wronskian(const Eigenfunction& f_minus, const Eigenfunction& f_plus);

// f_-^z = f_- - f_-(z)/f_+(z) f_+ on [z, window.hi].
Eigenfunction killed_f_minus(const EigenPair& pair, double z);

// E_x[exp(-lambda tau_a)] for a < x; E_x[exp(-lambda tau_a); tau_a < tau_-]
// for a > x.
double hitting_laplace(const EigenPair& pair, double x, double a);

enum class LimitKind { zero, positive, diverges, bounded, indeterminate, not_applicable };
std::string to_string(LimitKind k);

struct LadderPoint {
    double at;
    double value;
};

// alpha_+ / f_+(x0) estimated without consulting tail flags: f_+ is replaced
// by the solution killed at R, and -(R - x0) f'(R) / f(x0) is followed along
// R = x0 + 2^k.
struct AlphaEstimate {
    LimitKind kind = LimitKind::indeterminate;
    double value = 0.0;
    std::vector<LadderPoint> ladder;
};
AlphaEstimate estimate_alpha_plus(const SpeedMeasure& m, double lambda, const EigenOptions& opts = {},
                                  double cauchy_tol = 1e-6);

// f'_-(R) with f_-(x0) = 1 along R = x0 + 2^k, k = 0, 1, ... until `stop`
// returns true, the ladder is exhausted or the values overflow.
std::vector<LadderPoint> derivative_ladder(const SpeedMeasure& m, double lambda, const EigenOptions& opts,
                                           const std::function<bool(const std::vector<LadderPoint>&)>& stop);

void write_csv(const Eigenfunction& f, std::ostream& os);

}  // namespace natscale
