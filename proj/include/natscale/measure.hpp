#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace natscale {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Side { left, right };

inline Side opposite(Side s) { return s == Side::left ? Side::right : Side::left; }
std::string to_string(Side s);

enum class CaseTag {
    case_i,           // l- finite, l+ = +inf
    case_i_mirrored,  // l- = -inf, l+ finite; reduces to case_i under x -> -x
    case_ii,          // both infinite
    bounded,          // both finite
};
std::string to_string(CaseTag c);

struct Interval {
    double lo = -kInf;
    double hi = kInf;

    Interval() = default;
    Interval(double l, double h);

    bool lo_finite() const { return std::isfinite(lo); }
    bool hi_finite() const { return std::isfinite(hi); }
    bool contains(double x) const { return x > lo && x < hi; }
    bool finite(Side s) const { return s == Side::left ? lo_finite() : hi_finite(); }
    double end(Side s) const { return s == Side::left ? lo : hi; }
    CaseTag case_tag() const;
    Interval reflected() const { return {-hi, -lo}; }
};

enum class TailVerdict { infinite, finite, undeclared };
enum class TailProvenance { declared_analytic, extrapolated };
std::string to_string(TailVerdict v);
std::string to_string(TailProvenance p);

// Tail behaviour of |x| m(dx) towards one end of the interval.
struct TailInfo {
    TailVerdict verdict = TailVerdict::undeclared;
    TailProvenance provenance = TailProvenance::declared_analytic;
    // Power-law exponent of the density in that tail, NaN when not meaningful.
    double exponent = std::numeric_limits<double>::quiet_NaN();
};

struct TailMoment {
    Side side = Side::right;
    TailVerdict verdict = TailVerdict::undeclared;
    // Present for every Finite verdict on an unbounded side. On a bounded side
    // the verdict is Finite by local finiteness and the value is reported only
    // when the integral converges up to the finite endpoint.
    std::optional<double> value;
    TailProvenance provenance = TailProvenance::declared_analytic;
};

struct Atom {
    double position;
    double mass;
};

// Density kernels. All are analytic so that integrals against x^0 and x^1
// have closed forms.
struct ConstantKernel {
    double c;
};
// c * max(|x|, knee)^(-p)
struct PowerKernel {
    double c;
    double p;
    double knee;
};
// Piecewise-linear interpolation of tabulated samples.
struct LinearTableKernel {
    std::vector<double> x;
    std::vector<double> rho;
};

using Kernel = std::variant<ConstantKernel, PowerKernel, LinearTableKernel>;

struct Piece {
    double lo;
    double hi;
    Kernel kernel;
};

// Speed measure m(dx) = rho(x) dx + sum of atoms on an open interval. The
// scale function is the identity throughout. Immutable after construction.
class SpeedMeasure {
public:
    SpeedMeasure(Interval interval, std::vector<Piece> pieces, std::vector<Atom> atoms,
                 TailInfo left, TailInfo right, nlohmann::json descriptor);

    const Interval& interval() const { return interval_; }
    const std::vector<Piece>& pieces() const { return pieces_; }
    std::span<const Atom> atoms() const { return atoms_; }
    bool has_atoms() const { return !atoms_.empty(); }
    const TailInfo& tail(Side s) const { return s == Side::left ? left_ : right_; }
    const nlohmann::json& descriptor() const { return descriptor_; }

    double density(double x) const;

    // Integral of x^moment rho(x) over [a, b] (moment 0 or 1), a <= b. Ends may
    // be infinite; the result may then be infinite. Atoms are not included.
    double density_integral(double a, double b, int moment) const;

    // Integral of |x| rho(x) over [a, b].
    double abs_moment(double a, double b) const;

    // Interior points where the density is not smooth (piece boundaries,
    // knees, table nodes), sorted.
    std::vector<double> knots() const;

    // Point around which series expansions are taken: 0 when inside the
    // interval, otherwise a point at unit distance from the finite end (or the
    // midpoint of a bounded interval).
    double expansion_point() const;

    SpeedMeasure reflected() const;
    SpeedMeasure scaled(double factor) const;

private:
    const Piece& piece_at(double x) const;

    Interval interval_;
    std::vector<Piece> pieces_;
    std::vector<Atom> atoms_;
    TailInfo left_;
    TailInfo right_;
    nlohmann::json descriptor_;
};

// Builds a measure from a family descriptor:
//   {"family": "constant"|"power_tail"|"hybrid"|"tabulated"|"reflected"|"scaled",
//    "interval": [lo, hi] with "-inf"/"inf" sentinels, family parameters,
//    "atoms": [[x, mass], ...], "tail_exponent": p | {"left": p, "right": q}}
// Unknown keys are rejected.
SpeedMeasure build_measure(const nlohmann::json& descriptor);

// m((a, b]), a <= b, both strictly inside the interval.
double mass(const SpeedMeasure& m, double a, double b);

// Integral of |x| m(dx) over [r, l+) (right) or (l-, r] (left).
TailMoment first_moment_tail(const SpeedMeasure& m, double r, Side side);

// Integrals over the tail beyond `from` on the given side (towards an infinite
// end): mass and integral of |x - from| rho. Atoms beyond `from` are included.
double tail_mass(const SpeedMeasure& m, double from, Side side);
double tail_distance_moment(const SpeedMeasure& m, double from, Side side);

nlohmann::json to_json(const TailMoment& t);

namespace families {
// rho = 2 on the real line (standard Brownian motion).
SpeedMeasure brownian();
// rho = 2 x^-4 on (0, inf): the inverse Bessel process, sigma(x) = x^2.
SpeedMeasure inverse_bessel();
// rho = 2 left of the knee, 2 x^-4 right of it, on the real line.
SpeedMeasure hybrid(double knee = 1.0);
SpeedMeasure mirrored_hybrid(double knee = 1.0);
// rho = 2 max(|x|, 1)^-4 on the real line: both tail moments finite.
SpeedMeasure double_power_tail();
// rho = 2 on (l, inf): Brownian motion absorbed at l.
SpeedMeasure absorbed_brownian(double l);
}  // namespace families

}  // namespace natscale
