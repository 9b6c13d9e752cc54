#include "natscale/measure.hpp"

#include <algorithm>
#include <set>

#include "natscale/error.hpp"

namespace natscale {

using nlohmann::json;

std::string to_string(Side s) { return s == Side::left ? "left" : "right"; }

std::string to_string(CaseTag c)
{
    switch (c) {
    case CaseTag::case_i: return "CaseI";
    case CaseTag::case_i_mirrored: return "CaseIMirrored";
    case CaseTag::case_ii: return "CaseII";
    case CaseTag::bounded: return "Bounded";
    }
    return "?";
}

std::string to_string(TailVerdict v)
{
    switch (v) {
    case TailVerdict::infinite: return "Infinite";
    case TailVerdict::finite: return "Finite";
    case TailVerdict::undeclared: return "Undeclared";
    }
    return "?";
}

std::string to_string(TailProvenance p)
{
    return p == TailProvenance::declared_analytic ? "declared-analytic" : "extrapolated";
}

Interval::Interval(double l, double h) : lo(l), hi(h)
{
    if (std::isnan(l) || std::isnan(h) || !(l < h))
        throw InvalidArgument("interval requires l_minus < l_plus");
}

CaseTag Interval::case_tag() const
{
    if (lo_finite() && hi_finite()) return CaseTag::bounded;
    if (lo_finite()) return CaseTag::case_i;
    if (hi_finite()) return CaseTag::case_i_mirrored;
    return CaseTag::case_ii;
}

namespace {

// Integral of c y^(q-p) over [u, v], 0 <= u <= v.
double pos_power(double c, double p, double u, double v, int q)
{
    if (u >= v) return 0.0;
    const double e = q - p + 1.0;
    if (std::isinf(v)) {
        if (e < 0.0 && u > 0.0) return c * std::pow(u, e) / (-e);
        return kInf;
    }
    if (u == 0.0) {
        if (e > 0.0) return c * std::pow(v, e) / e;
        return kInf;
    }
    if (e == 0.0) return c * std::log(v / u);
    return c * std::pow(u, e) * std::expm1(e * std::log(v / u)) / e;
}

// Integral of c x^q over [u, v].
double poly_integral(double c, double u, double v, int q)
{
    if (u >= v) return 0.0;
    if (q == 0) return c * (v - u);
    return c * 0.5 * (v - u) * (v + u);
}

double kernel_density(const Kernel& k, double x)
{
    return std::visit(
        [x](const auto& ker) -> double {
            using T = std::decay_t<decltype(ker)>;
            if constexpr (std::is_same_v<T, ConstantKernel>) {
                return ker.c;
            } else if constexpr (std::is_same_v<T, PowerKernel>) {
                return ker.c * std::pow(std::max(std::abs(x), ker.knee), -ker.p);
            } else {
                const auto& xs = ker.x;
                if (x <= xs.front()) return ker.rho.front();
                if (x >= xs.back()) return ker.rho.back();
                auto it = std::upper_bound(xs.begin(), xs.end(), x);
                const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
                const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
                return ker.rho[i] + w * (ker.rho[i + 1] - ker.rho[i]);
            }
        },
        k);
}

double kernel_integral(const Kernel& k, double a, double b, int q)
{
    if (a >= b) return 0.0;
    return std::visit(
        [a, b, q](const auto& ker) -> double {
            using T = std::decay_t<decltype(ker)>;
            if constexpr (std::is_same_v<T, ConstantKernel>) {
                return poly_integral(ker.c, a, b, q);
            } else if constexpr (std::is_same_v<T, PowerKernel>) {
                const double kn = ker.knee;
                double total = 0.0;
                // x <= -knee
                if (a < -kn) {
                    const double v = std::min(b, -kn);
                    const double s = (q == 1) ? -1.0 : 1.0;
                    total += s * pos_power(ker.c, ker.p, -v, -a, q);
                }
                // |x| < knee
                if (kn > 0.0) {
                    const double u = std::max(a, -kn), v = std::min(b, kn);
                    if (u < v) total += poly_integral(ker.c * std::pow(kn, -ker.p), u, v, q);
                }
                // x >= knee
                if (b > kn) total += pos_power(ker.c, ker.p, std::max(a, kn), b, q);
                return total;
            } else {
                double total = 0.0;
                const auto& xs = ker.x;
                const auto& rs = ker.rho;
                for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
                    const double u = std::max(a, xs[i]), v = std::min(b, xs[i + 1]);
                    if (u >= v) continue;
                    const double slope = (rs[i + 1] - rs[i]) / (xs[i + 1] - xs[i]);
                    const double alpha = rs[i] - slope * xs[i];
                    if (q == 0)
                        total += alpha * (v - u) + slope * 0.5 * (v - u) * (v + u);
                    else
                        total += alpha * 0.5 * (v - u) * (v + u) +
                                 slope * (v - u) * (v * v + u * v + u * u) / 3.0;
                }
                return total;
            }
        },
        k);
}

Kernel kernel_reflected(const Kernel& k)
{
    if (const auto* t = std::get_if<LinearTableKernel>(&k)) {
        LinearTableKernel r;
        r.x.reserve(t->x.size());
        for (auto it = t->x.rbegin(); it != t->x.rend(); ++it) r.x.push_back(-*it);
        r.rho.assign(t->rho.rbegin(), t->rho.rend());
        return r;
    }
    return k;  // constant and power kernels are even in x
}

Kernel kernel_scaled(const Kernel& k, double f)
{
    return std::visit(
        [f](const auto& ker) -> Kernel {
            using T = std::decay_t<decltype(ker)>;
            T out = ker;
            if constexpr (std::is_same_v<T, LinearTableKernel>) {
                for (auto& r : out.rho) r *= f;
            } else {
                out.c *= f;
            }
            return out;
        },
        k);
}

// ---------------------------------------------------------------- parsing --

double parse_extended(const json& v, const std::string& what)
{
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    throw InvalidArgument(what + ": expected a number or \"-inf\"/\"inf\"");
}

double parse_number(const json& j, const std::string& key, const std::string& ctx)
{
    if (!j.contains(key)) throw InvalidArgument(ctx + ": missing key '" + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number()) throw InvalidArgument(ctx + ": key '" + key + "' must be a number");
    return v.get<double>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& ctx)
{
    if (!j.is_object()) throw InvalidArgument(ctx + ": descriptor must be a JSON object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw InvalidArgument(ctx + ": unknown key '" + it.key() + "'");
}

struct Built {
    std::vector<Piece> pieces;
    TailInfo left;
    TailInfo right;
};

TailInfo bounded_tail() { return {TailVerdict::finite, TailProvenance::declared_analytic, std::nan("")}; }

TailInfo power_tail_info(double p)
{
    return {p <= 2.0 ? TailVerdict::infinite : TailVerdict::finite, TailProvenance::declared_analytic, p};
}

// Least-squares log-log slope of the density over the last two decades of the
// table on one side. Returns the fitted decay exponent, or nullopt when the
// samples do not support a fit.
std::optional<double> fit_tail_exponent(const std::vector<double>& xs, const std::vector<double>& rs, Side side)
{
    std::vector<std::pair<double, double>> pts;  // (|x|, rho) on that side
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = side == Side::right ? xs[i] : -xs[i];
        if (x > 0.0) pts.emplace_back(x, rs[i]);
    }
    if (pts.size() < 3) return std::nullopt;
    double xmin = kInf, xmax = 0.0;
    for (auto& [x, r] : pts) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
    }
    if (xmax / xmin < 100.0) return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (auto& [x, r] : pts) {
        if (x < xmax / 100.0) continue;
        if (!(r > 0.0)) return std::nullopt;
        const double lx = std::log(x), ly = std::log(r);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 3) return std::nullopt;
    const double den = n * sxx - sx * sx;
    if (!(den > 0.0)) return std::nullopt;
    return -(n * sxy - sx * sy) / den;
}

std::optional<double> declared_exponent(const json& j, Side side)
{
    if (!j.contains("tail_exponent")) return std::nullopt;
    const auto& t = j.at("tail_exponent");
    if (t.is_number()) return t.get<double>();
    if (t.is_object()) {
        check_keys(t, {"left", "right"}, "tail_exponent");
        const char* key = side == Side::left ? "left" : "right";
        if (t.contains(key)) return parse_number(t, key, "tail_exponent");
        return std::nullopt;
    }
    throw InvalidArgument("tail_exponent must be a number or {\"left\": p, \"right\": q}");
}

constexpr double kFitMargin = 0.05;

Built build_tabulated(const json& j, double lo, double hi, const std::string& ctx)
{
    if (!j.contains("x") || !j.contains("density"))
        throw InvalidArgument(ctx + ": tabulated family needs 'x' and 'density' arrays");
    auto xs = j.at("x").get<std::vector<double>>();
    auto rs = j.at("density").get<std::vector<double>>();
    if (xs.size() < 2 || xs.size() != rs.size())
        throw InvalidArgument(ctx + ": 'x' and 'density' must have equal length >= 2");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(rs[i] > 0.0)) {
            if (rs[i] < 0.0) throw InvalidArgument(ctx + ": negative density sample");
            throw InvalidArgument(ctx + ": density samples must be positive");
        }
        if (i > 0 && !(xs[i] > xs[i - 1])) throw InvalidArgument(ctx + ": 'x' must be strictly increasing");
    }
    if (xs.front() < lo || xs.back() > hi) throw InvalidArgument(ctx + ": table extends outside the interval");

    Built b;
    auto side_tail = [&](Side side) -> std::pair<TailInfo, std::optional<double>> {
        const bool finite_end = std::isfinite(side == Side::left ? lo : hi);
        if (finite_end) return {bounded_tail(), std::nullopt};
        const double edge = side == Side::left ? xs.front() : xs.back();
        const bool edge_ok = side == Side::left ? edge < 0.0 : edge > 0.0;
        if (auto p = declared_exponent(j, side)) {
            if (!edge_ok)
                throw InvalidArgument(ctx + ": tail_exponent on the " + to_string(side) +
                                      " needs the table to end away from 0 on that side");
            return {power_tail_info(*p), p};
        }
        if (edge_ok) {
            if (auto p = fit_tail_exponent(xs, rs, side)) {
                TailInfo t{*p <= 2.0 + kFitMargin ? TailVerdict::infinite : TailVerdict::finite,
                           TailProvenance::extrapolated, *p};
                return {t, p};
            }
        }
        return {TailInfo{}, std::nullopt};
    };
    auto [ltail, lp] = side_tail(Side::left);
    auto [rtail, rp] = side_tail(Side::right);
    b.left = ltail;
    b.right = rtail;

    if (lo < xs.front()) {
        if (lp)
            b.pieces.push_back({lo, xs.front(), PowerKernel{rs.front() * std::pow(-xs.front(), *lp), *lp, 0.0}});
        else
            b.pieces.push_back({lo, xs.front(), ConstantKernel{rs.front()}});
    }
    b.pieces.push_back({xs.front(), xs.back(), LinearTableKernel{xs, rs}});
    if (xs.back() < hi) {
        if (rp)
            b.pieces.push_back({xs.back(), hi, PowerKernel{rs.back() * std::pow(xs.back(), *rp), *rp, 0.0}});
        else
            b.pieces.push_back({xs.back(), hi, ConstantKernel{rs.back()}});
    }
    return b;
}

// Builds the density pieces of a non-composite family over [lo, hi].
Built build_core(const json& j, double lo, double hi, const std::string& ctx)
{
    const auto family = j.at("family").get<std::string>();
    Built b;
    if (family == "constant") {
        const double c = parse_number(j, "density", ctx);
        if (c < 0.0) throw InvalidArgument(ctx + ": negative density parameter");
        if (c == 0.0) throw InvalidArgument(ctx + ": density must be positive");
        b.pieces.push_back({lo, hi, ConstantKernel{c}});
        b.left = std::isfinite(lo) ? bounded_tail() : power_tail_info(0.0);
        b.right = std::isfinite(hi) ? bounded_tail() : power_tail_info(0.0);
    } else if (family == "power_tail") {
        const double c = parse_number(j, "coefficient", ctx);
        const double p = parse_number(j, "exponent", ctx);
        const double knee = j.contains("knee") ? parse_number(j, "knee", ctx) : 0.0;
        if (c < 0.0) throw InvalidArgument(ctx + ": negative density parameter");
        if (c == 0.0) throw InvalidArgument(ctx + ": coefficient must be positive");
        if (knee < 0.0) throw InvalidArgument(ctx + ": knee must be nonnegative");
        if (knee == 0.0 && p > 0.0 && lo < 0.0 && hi > 0.0)
            throw InvalidArgument(ctx + ": power_tail without a knee is singular at 0, which lies inside the interval");
        b.pieces.push_back({lo, hi, PowerKernel{c, p, knee}});
        b.left = std::isfinite(lo) ? bounded_tail() : power_tail_info(p);
        b.right = std::isfinite(hi) ? bounded_tail() : power_tail_info(p);
    } else if (family == "tabulated") {
        b = build_tabulated(j, lo, hi, ctx);
    } else {
        throw InvalidArgument(ctx + ": unknown family '" + family + "'");
    }
    return b;
}

std::vector<Atom> parse_atoms(const json& j, const Interval& iv)
{
    std::vector<Atom> atoms;
    if (!j.contains("atoms")) return atoms;
    for (const auto& a : j.at("atoms")) {
        if (!a.is_array() || a.size() != 2) throw InvalidArgument("atoms: each atom is [x, mass]");
        Atom at{a[0].get<double>(), a[1].get<double>()};
        if (!iv.contains(at.position)) throw InvalidArgument("atoms: atom position outside the interval");
        if (!(at.mass > 0.0)) throw InvalidArgument("atoms: atom mass must be positive");
        atoms.push_back(at);
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.position < b.position; });
    return atoms;
}

Interval parse_interval(const json& j, const std::string& ctx)
{
    if (!j.contains("interval")) throw InvalidArgument(ctx + ": missing key 'interval'");
    const auto& v = j.at("interval");
    if (!v.is_array() || v.size() != 2) throw InvalidArgument(ctx + ": 'interval' must be [l_minus, l_plus]");
    return Interval(parse_extended(v[0], "interval"), parse_extended(v[1], "interval"));
}

}  // namespace

// ------------------------------------------------------------ SpeedMeasure --

SpeedMeasure::SpeedMeasure(Interval interval, std::vector<Piece> pieces, std::vector<Atom> atoms,
                           TailInfo left, TailInfo right, json descriptor)
    : interval_(interval),
      pieces_(std::move(pieces)),
      atoms_(std::move(atoms)),
      left_(left),
      right_(right),
      descriptor_(std::move(descriptor))
{
    if (pieces_.empty()) throw InvalidArgument("speed measure needs at least one density piece");
}

const Piece& SpeedMeasure::piece_at(double x) const
{
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                               [](double v, const Piece& p) { return v < p.hi; });
    if (it == pieces_.end()) return pieces_.back();
    return *it;
}

double SpeedMeasure::density(double x) const { return kernel_density(piece_at(x).kernel, x); }

double SpeedMeasure::density_integral(double a, double b, int moment) const
{
    if (a > b) throw InvalidArgument("density_integral requires a <= b");
    double total = 0.0;
    for (const auto& p : pieces_) {
        const double u = std::max(a, p.lo), v = std::min(b, p.hi);
        if (u < v) total += kernel_integral(p.kernel, u, v, moment);
    }
    return total;
}

double SpeedMeasure::abs_moment(double a, double b) const
{
    if (b <= 0.0) return -density_integral(a, b, 1);
    if (a >= 0.0) return density_integral(a, b, 1);
    return -density_integral(a, 0.0, 1) + density_integral(0.0, b, 1);
}

std::vector<double> SpeedMeasure::knots() const
{
    std::vector<double> k;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const auto& p = pieces_[i];
        if (i > 0) k.push_back(p.lo);
        if (const auto* pw = std::get_if<PowerKernel>(&p.kernel)) {
            for (double kn : {-pw->knee, pw->knee})
                if (pw->knee > 0.0 && kn > p.lo && kn < p.hi) k.push_back(kn);
        } else if (const auto* t = std::get_if<LinearTableKernel>(&p.kernel)) {
            for (std::size_t j = 1; j + 1 < t->x.size(); ++j) k.push_back(t->x[j]);
        }
    }
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    return k;
}

double SpeedMeasure::expansion_point() const
{
    const auto& iv = interval_;
    if (iv.contains(0.0)) return 0.0;
    if (iv.lo_finite() && iv.hi_finite()) return 0.5 * (iv.lo + iv.hi);
    if (iv.lo_finite()) return iv.lo + 1.0;
    return iv.hi - 1.0;
}

SpeedMeasure SpeedMeasure::reflected() const
{
    std::vector<Piece> ps;
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it)
        ps.push_back({-it->hi, -it->lo, kernel_reflected(it->kernel)});
    std::vector<Atom> as;
    for (auto it = atoms_.rbegin(); it != atoms_.rend(); ++it) as.push_back({-it->position, it->mass});
    json d = {{"family", "reflected"}, {"base", descriptor_}};
    return SpeedMeasure(interval_.reflected(), std::move(ps), std::move(as), right_, left_, std::move(d));
}

SpeedMeasure SpeedMeasure::scaled(double factor) const
{
    if (!(factor > 0.0) || !std::isfinite(factor)) throw InvalidArgument("scale factor must be positive and finite");
    std::vector<Piece> ps;
    for (const auto& p : pieces_) ps.push_back({p.lo, p.hi, kernel_scaled(p.kernel, factor)});
    std::vector<Atom> as = atoms_;
    for (auto& a : as) a.mass *= factor;
    json d = {{"family", "scaled"}, {"factor", factor}, {"base", descriptor_}};
    return SpeedMeasure(interval_, std::move(ps), std::move(as), left_, right_, std::move(d));
}

// ------------------------------------------------------------- operations --

SpeedMeasure build_measure(const json& j)
{
    if (!j.is_object() || !j.contains("family")) throw InvalidArgument("measure descriptor needs a 'family' key");
    const auto family = j.at("family").get<std::string>();
    const std::string ctx = "measure(" + family + ")";

    if (family == "reflected") {
        check_keys(j, {"family", "base"}, ctx);
        return build_measure(j.at("base")).reflected();
    }
    if (family == "scaled") {
        check_keys(j, {"family", "factor", "base"}, ctx);
        return build_measure(j.at("base")).scaled(parse_number(j, "factor", ctx));
    }

    const Interval iv = parse_interval(j, ctx);
    Built b;
    if (family == "hybrid") {
        check_keys(j, {"family", "interval", "knee", "left", "right", "atoms"}, ctx);
        const double knee = j.contains("knee") ? parse_number(j, "knee", ctx) : 1.0;
        if (!iv.contains(knee)) throw InvalidArgument(ctx + ": knee outside interval");
        for (const char* side : {"left", "right"}) {
            if (!j.contains(side)) throw InvalidArgument(ctx + ": missing key '" + side + "'");
            const auto& child = j.at(side);
            if (!child.is_object() || !child.contains("family"))
                throw InvalidArgument(ctx + ": '" + side + "' must be a family descriptor");
            check_keys(child, {"family", "density", "coefficient", "exponent", "knee", "x", "tail_exponent"},
                       ctx + "." + side);
        }
        Built l = build_core(j.at("left"), iv.lo, knee, ctx + ".left");
        Built r = build_core(j.at("right"), knee, iv.hi, ctx + ".right");
        b.pieces = std::move(l.pieces);
        b.pieces.insert(b.pieces.end(), r.pieces.begin(), r.pieces.end());
        b.left = l.left;
        b.right = r.right;
    } else {
        if (family == "constant")
            check_keys(j, {"family", "interval", "density", "atoms"}, ctx);
        else if (family == "power_tail")
            check_keys(j, {"family", "interval", "coefficient", "exponent", "knee", "atoms"}, ctx);
        else if (family == "tabulated")
            check_keys(j, {"family", "interval", "x", "density", "tail_exponent", "atoms"}, ctx);
        else
            throw InvalidArgument("unknown measure family '" + family + "'");
        b = build_core(j, iv.lo, iv.hi, ctx);
    }
    return SpeedMeasure(iv, std::move(b.pieces), parse_atoms(j, iv), b.left, b.right, j);
}

double mass(const SpeedMeasure& m, double a, double b)
{
    const auto& iv = m.interval();
    if (a > b) throw InvalidArgument("mass: requires a <= b");
    if (!iv.contains(a) || !iv.contains(b)) throw InvalidArgument("mass: endpoints must lie inside the open interval");
    double total = m.density_integral(a, b, 0);
    for (const auto& at : m.atoms())
        if (at.position > a && at.position <= b) total += at.mass;
    return total;
}

TailMoment first_moment_tail(const SpeedMeasure& m, double r, Side side)
{
    const auto& iv = m.interval();
    if (!iv.contains(r)) throw InvalidArgument("first_moment_tail: r outside the interval");

    auto integral = [&]() {
        double v = side == Side::right ? m.abs_moment(r, iv.hi) : m.abs_moment(iv.lo, r);
        for (const auto& at : m.atoms()) {
            const bool in = side == Side::right ? at.position >= r : at.position <= r;
            if (in) v += std::abs(at.position) * at.mass;
        }
        return v;
    };

    TailMoment t;
    t.side = side;
    if (iv.finite(side)) {
        t.verdict = TailVerdict::finite;
        t.provenance = TailProvenance::declared_analytic;
        const double v = integral();
        if (std::isfinite(v)) t.value = v;
        return t;
    }
    const TailInfo& info = m.tail(side);
    t.provenance = info.provenance;
    switch (info.verdict) {
    case TailVerdict::undeclared:
        throw RefusedVerdict("first_moment_tail: the " + to_string(side) +
                             " tail is undeclared and the tabulated samples do not span two decades "
                             "for extrapolation; declare 'tail_exponent'");
    case TailVerdict::infinite:
        t.verdict = TailVerdict::infinite;
        return t;
    case TailVerdict::finite:
        t.verdict = TailVerdict::finite;
        t.value = integral();
        return t;
    }
    return t;
}

double tail_mass(const SpeedMeasure& m, double from, Side side)
{
    const auto& iv = m.interval();
    double v = side == Side::right ? m.density_integral(from, iv.hi, 0) : m.density_integral(iv.lo, from, 0);
    for (const auto& at : m.atoms()) {
        const bool in = side == Side::right ? at.position > from : at.position < from;
        if (in) v += at.mass;
    }
    return v;
}

double tail_distance_moment(const SpeedMeasure& m, double from, Side side)
{
    const auto& iv = m.interval();
    double m0, m1;
    if (side == Side::right) {
        m0 = m.density_integral(from, iv.hi, 0);
        m1 = m.density_integral(from, iv.hi, 1);
    } else {
        m0 = m.density_integral(iv.lo, from, 0);
        m1 = m.density_integral(iv.lo, from, 1);
    }
    if (!std::isfinite(m0) || !std::isfinite(m1)) return kInf;
    double v = side == Side::right ? m1 - from * m0 : from * m0 - m1;
    for (const auto& at : m.atoms()) {
        const bool in = side == Side::right ? at.position > from : at.position < from;
        if (in) v += std::abs(at.position - from) * at.mass;
    }
    return std::max(v, 0.0);
}

json to_json(const TailMoment& t)
{
    json j = {{"side", to_string(t.side)},
              {"verdict", to_string(t.verdict)},
              {"provenance", to_string(t.provenance)}};
    if (t.value) j["value"] = *t.value;
    return j;
}

namespace families {

SpeedMeasure brownian()
{
    return build_measure({{"family", "constant"}, {"interval", {"-inf", "inf"}}, {"density", 2.0}});
}

SpeedMeasure inverse_bessel()
{
    return build_measure({{"family", "power_tail"}, {"interval", {0.0, "inf"}}, {"coefficient", 2.0}, {"exponent", 4.0}});
}

SpeedMeasure hybrid(double knee)
{
    return build_measure({{"family", "hybrid"},
                          {"interval", {"-inf", "inf"}},
                          {"knee", knee},
                          {"left", {{"family", "constant"}, {"density", 2.0}}},
                          {"right", {{"family", "power_tail"}, {"coefficient", 2.0}, {"exponent", 4.0}}}});
}

SpeedMeasure mirrored_hybrid(double knee) { return hybrid(knee).reflected(); }

SpeedMeasure double_power_tail()
{
    return build_measure({{"family", "power_tail"},
                          {"interval", {"-inf", "inf"}},
                          {"coefficient", 2.0},
                          {"exponent", 4.0},
                          {"knee", 1.0}});
}

SpeedMeasure absorbed_brownian(double l)
{
    return build_measure({{"family", "constant"}, {"interval", {l, "inf"}}, {"density", 2.0}});
}

}  // namespace families

}  // namespace natscale
