#include "natscale/classify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "natscale/error.hpp"

namespace natscale {

using nlohmann::json;

std::string to_string(Classification c)
{
    switch (c) {
    case Classification::martingale: return "Martingale";
    case Classification::strict_submartingale: return "StrictSubmartingale";
    case Classification::strict_supermartingale: return "StrictSupermartingale";
    case Classification::strict_local_martingale_only: return "StrictLocalMartingaleOnly";
    }
    return "?";
}

std::string case_name(CaseTag c)
{
    switch (c) {
    case CaseTag::case_i: return "CaseI";
    case CaseTag::case_i_mirrored: return "CaseIMirrored";
    case CaseTag::case_ii: return "CaseII";
    case CaseTag::bounded: return "Bounded";
    }
    return "?";
}

std::string to_string(EvidenceStatus s)
{
    switch (s) {
    case EvidenceStatus::pass: return "pass";
    case EvidenceStatus::fail: return "fail";
    case EvidenceStatus::not_applicable: return "not-applicable";
    }
    return "?";
}

const Evidence* Verdict::find(const std::string& id) const
{
    for (const auto& e : evidence)
        if (e.id == id) return &e;
    return nullptr;
}

json to_json(const Verdict& v)
{
    json ev = json::array();
    for (const auto& e : v.evidence) ev.push_back({{"id", e.id}, {"status", to_string(e.status)}, {"payload", e.payload}});
    return {{"classification", to_string(v.classification)},
            {"case", case_name(v.case_tag)},
            {"x", v.x},
            {"lambda", v.lambda},
            {"evidence", ev}};
}

Classification decide(CaseTag c, TailVerdict left, TailVerdict right)
{
    const bool li = left == TailVerdict::infinite, ri = right == TailVerdict::infinite;
    switch (c) {
    case CaseTag::bounded: return Classification::martingale;
    case CaseTag::case_i: return ri ? Classification::martingale : Classification::strict_supermartingale;
    case CaseTag::case_i_mirrored: return li ? Classification::martingale : Classification::strict_submartingale;
    case CaseTag::case_ii:
        if (li && ri) return Classification::martingale;
        if (ri) return Classification::strict_submartingale;
        if (li) return Classification::strict_supermartingale;
        return Classification::strict_local_martingale_only;
    }
    return Classification::martingale;
}

namespace {

json ladder_json(const std::vector<LadderPoint>& l)
{
    json a = json::array();
    for (const auto& p : l) a.push_back({p.at, std::isfinite(p.value) ? json(p.value) : json("inf")});
    return a;
}

SideDivergence side_divergence(const SpeedMeasure& m, double lambda, const ClassifyOptions& o)
{
    SideDivergence s;
    LimitKind kind = LimitKind::indeterminate;
    auto stop = [&](const std::vector<LadderPoint>& t) {
        const std::size_t n = t.size();
        const double v = t.back().value;
        if (!std::isfinite(v)) {
            kind = LimitKind::diverges;
            return true;
        }
        if (n >= 3) {
            const double r1 = t[n - 1].value / t[n - 2].value, r2 = t[n - 2].value / t[n - 3].value;
            if (r1 >= o.divergence_factor && r2 >= o.divergence_factor && v > o.divergence_threshold) {
                kind = LimitKind::diverges;
                return true;
            }
        }
        if (n >= 2 && std::abs(v - t[n - 2].value) <= o.cauchy_tol * std::abs(v)) {
            kind = LimitKind::bounded;
            return true;
        }
        return false;
    };
    s.trace = derivative_ladder(m, lambda, o.eigen, stop);
    if (kind == LimitKind::indeterminate && !s.trace.empty() && std::abs(s.trace.back().value) > 1e300)
        kind = LimitKind::diverges;
    s.kind = kind;
    return s;
}

double one_sided_density(const SpeedMeasure& m, double x, double toward) { return m.density(std::nextafter(x, toward)); }

// lambda * integral over (x, R] of (y - x) f(y) m(dy) on the eigenfunction grid.
double weighted_integral(const SpeedMeasure& m, const Eigenfunction& f, double x)
{
    const auto& g = f.grid;
    const int n = g.order();
    const auto& rule = PanelRule::get(n);
    const auto& br = g.breaks();
    const auto& xs = g.nodes();
    double acc = 0.0;
    const std::size_t k0 = g.panel_of(x);
    if (br[k0] != x) throw InvalidArgument("weighted_integral: x must be a panel break");
    for (std::size_t k = k0; k < g.panels(); ++k) {
        const std::size_t first = g.panel_first(k);
        const double half = 0.5 * (br[k + 1] - br[k]);
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            const double y = xs[first + j];
            const double rho = j == 0 ? one_sided_density(m, br[k], br[k + 1])
                               : j == n - 1 ? one_sided_density(m, br[k + 1], br[k])
                                            : m.density(y);
            s += rule.weight(j) * (y - x) * f.values[first + j] * rho;
        }
        acc += half * s;
    }
    for (const auto& a : m.atoms())
        if (a.position > x && a.position <= g.hi()) acc += (a.position - x) * f.value_at(a.position) * a.mass;
    return f.lambda * acc;
}

}  // namespace

DivergenceReport fprime_divergence(const SpeedMeasure& m, double lambda, const ClassifyOptions& opts)
{
    if (!(lambda > 0.0)) throw InvalidArgument("fprime_divergence: lambda must be positive");
    DivergenceReport r;
    if (!m.interval().hi_finite()) r.right = side_divergence(m, lambda, opts);
    if (!m.interval().lo_finite()) {
        // f'_+ of m at -z is -f'_- of the reflected measure at z.
        r.left = side_divergence(m.reflected(), lambda, opts);
        for (auto& p : r.left.trace) {
            p.at = -p.at;
            p.value = -p.value;
        }
    }
    return r;
}

AlphaTailReport alpha_tail_crosscheck(const SpeedMeasure& m, double lambda, const ClassifyOptions& opts)
{
    return alpha_tail_crosscheck(m, lambda, m.expansion_point(), opts);
}

AlphaTailReport alpha_tail_crosscheck(const SpeedMeasure& m, double lambda, double x, const ClassifyOptions& opts)
{
    if (!(lambda > 0.0)) throw InvalidArgument("alpha_tail_crosscheck: lambda must be positive");
    if (!m.interval().contains(x)) throw InvalidArgument("alpha_tail_crosscheck: x outside the interval");
    AlphaTailReport r;
    r.x = x;
    if (m.interval().hi_finite()) return r;
    r.applicable = true;

    r.alpha = estimate_alpha_plus(m, lambda, opts.eigen, opts.cauchy_tol);
    r.alpha_zero = r.alpha.kind == LimitKind::zero;
    const TailMoment tail = first_moment_tail(m, x, Side::right);
    r.tail_infinite = tail.verdict == TailVerdict::infinite;

    const double scale = std::max(1.0, std::abs(x));
    double lo = x - 0.5 * scale;
    if (m.interval().lo_finite()) lo = std::max(lo, x - 0.5 * (x - m.interval().lo));
    double prev = kInf;
    for (int k = 0; k <= opts.eigen.ladder_max; ++k) {
        const double R = x + scale * std::ldexp(1.0, k);
        const Eigenfunction fp = solve_f_plus(m, lambda, {lo, R}, opts.eigen);
        // Re-grid from x so the quadrature starts on a break.
        const double extra[] = {x};
        const PanelGrid grid = make_grid(m, lambda, x, R, opts.eigen, opts.eigen.points_per_window, extra);
        Eigenfunction f = fp;
        f.grid = grid;
        f.values.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) f.values[i] = fp.value_at(grid.nodes()[i]);
        double integral = weighted_integral(m, f, x);
        if (!r.tail_infinite)
            integral += lambda * fp.value_at(R) *
                        (tail_distance_moment(m, R, Side::right) + (R - x) * tail_mass(m, R, Side::right));
        const double fx = fp.value_at(x);
        r.identity_residual = fx - integral;
        r.identity_relative = r.identity_residual / fx;
        if (std::abs(r.identity_relative - prev) <= 1e-10) break;
        prev = r.identity_relative;
    }
    return r;
}

json to_json(const AlphaTailReport& r)
{
    return {{"applicable", r.applicable},
            {"alpha_zero", r.alpha_zero},
            {"tail_infinite", r.tail_infinite},
            {"identity_residual", r.identity_residual},
            {"identity_relative", r.identity_relative},
            {"x", r.x},
            {"alpha_estimate", {{"kind", to_string(r.alpha.kind)}, {"value", r.alpha.value}}}};
}

Verdict classify(const SpeedMeasure& m, double x, double lambda, const ClassifyOptions& opts)
{
    const auto& iv = m.interval();
    if (!iv.contains(x)) throw InvalidArgument("classify: x outside the interval");
    if (!(lambda > 0.0)) throw InvalidArgument("classify: lambda must be positive");

    Verdict v;
    v.case_tag = iv.case_tag();
    v.x = x;
    v.lambda = lambda;

    const TailMoment right = first_moment_tail(m, x, Side::right);
    const TailMoment left = first_moment_tail(m, x, Side::left);
    v.classification = decide(v.case_tag, left.verdict, right.verdict);

    auto tail_ev = [&](const TailMoment& t, const char* id) {
        Evidence e{id, EvidenceStatus::not_applicable, to_json(t)};
        if (!iv.finite(t.side)) e.status = t.verdict == TailVerdict::infinite ? EvidenceStatus::pass : EvidenceStatus::fail;
        v.evidence.push_back(e);
    };
    tail_ev(right, "tail-moment-right");
    tail_ev(left, "tail-moment-left");

    const DivergenceReport d = fprime_divergence(m, lambda, opts);
    auto div_ev = [&](const SideDivergence& s, const char* id) {
        Evidence e{id, EvidenceStatus::not_applicable, {{"limit", to_string(s.kind)}, {"ladder", ladder_json(s.trace)}}};
        if (s.kind == LimitKind::diverges) e.status = EvidenceStatus::pass;
        if (s.kind == LimitKind::bounded) e.status = EvidenceStatus::fail;
        v.evidence.push_back(e);
    };
    div_ev(d.right, "fprime-right");
    div_ev(d.left, "fprime-left");

    auto alpha_ev = [&](const SpeedMeasure& mm, const char* id, bool applicable) {
        Evidence e{id};
        if (applicable) {
            const AlphaEstimate a = estimate_alpha_plus(mm, lambda, opts.eigen, opts.cauchy_tol);
            e.payload = {{"limit", to_string(a.kind)}, {"value", a.value}};
            if (a.kind == LimitKind::zero) e.status = EvidenceStatus::pass;
            if (a.kind == LimitKind::positive) e.status = EvidenceStatus::fail;
        }
        v.evidence.push_back(e);
    };
    alpha_ev(m, "alpha-plus", !iv.hi_finite());
    alpha_ev(m.reflected(), "alpha-minus", !iv.lo_finite());

    Evidence defect{"defect-limit"};
    const bool one_finite = v.case_tag == CaseTag::case_i || v.case_tag == CaseTag::case_i_mirrored;
    if (opts.defect_evidence && one_finite) {
        const bool mirrored = v.case_tag == CaseTag::case_i_mirrored;
        DefectOptions dopt = opts.defect;
        dopt.eigen = opts.eigen;
        const DefectCurve c = mirrored ? defect_curve(m.reflected(), -x, dopt) : defect_curve(m, x, dopt);
        defect.payload = {{"extrapolated_limit", c.extrapolated_limit},
                          {"extrapolation_error", c.extrapolation_error},
                          {"target_gap", c.target_gap},
                          {"reaches_gap", c.reaches_gap},
                          {"monotone", c.monotone},
                          {"lambdas", c.lambdas},
                          {"defect", c.defect},
                          {"reflected", mirrored}};
        defect.status = c.reaches_gap ? EvidenceStatus::fail : EvidenceStatus::pass;
    }
    v.evidence.push_back(defect);
    return v;
}

// ---------------------------------------------------------------- audit --

namespace {

std::string fmt_lambda(const char* id, double lambda)
{
    std::ostringstream os;
    os << id << "@" << lambda;
    return os.str();
}

}  // namespace

AuditReport consistency_audit(const SpeedMeasure& m, double x, double lambda, std::size_t mc_budget,
                              const AuditOptions& opts)
{
    const auto& iv = m.interval();
    if (mc_budget > 0 && m.has_atoms()) throw InvalidArgument("consistency_audit: measures with atoms cannot be simulated");
    AuditReport r;
    r.verdict = classify(m, x, lambda, opts.classify);
    const TailVerdict rt = first_moment_tail(m, x, Side::right).verdict;
    const TailVerdict lt = first_moment_tail(m, x, Side::left).verdict;

    auto add = [&](CriterionCheck c) {
        r.all_consistent = r.all_consistent && c.consistent;
        r.criteria.push_back(std::move(c));
    };

    add({"classification-table", to_string(decide(r.verdict.case_tag, lt, rt)), to_string(r.verdict.classification),
         decide(r.verdict.case_tag, lt, rt) == r.verdict.classification});

    std::vector<double> lambdas = opts.lambdas.empty() ? std::vector<double>{lambda} : opts.lambdas;
    for (double lam : lambdas) {
        const DivergenceReport d = fprime_divergence(m, lam, opts.classify);
        auto div = [&](const SideDivergence& s, bool unbounded, TailVerdict t, const char* id) {
            if (!unbounded) return;
            const std::string want = t == TailVerdict::infinite ? "diverges" : "bounded";
            add({fmt_lambda(id, lam), want, to_string(s.kind), want == to_string(s.kind),
                 {{"ladder", ladder_json(s.trace)}}});
        };
        div(d.right, !iv.hi_finite(), rt, "fprime-right");
        div(d.left, !iv.lo_finite(), lt, "fprime-left");

        auto crosscheck = [&](const SpeedMeasure& mm, double xx, TailVerdict t, const char* id) {
            const AlphaTailReport l = alpha_tail_crosscheck(mm, lam, xx, opts.classify);
            const bool tail_inf = t == TailVerdict::infinite;
            bool ok = l.alpha_zero == tail_inf && l.tail_infinite == tail_inf;
            if (tail_inf) {
                ok = ok && std::abs(l.identity_relative) <= opts.residual_tol;
            } else {
                // The residual is alpha_+ / f_+(x), which the estimator also targets at the expansion point.
                ok = ok && l.alpha.kind == LimitKind::positive &&
                     std::abs(l.identity_relative - l.alpha.value) <= 1e-4 * std::abs(l.alpha.value);
            }
            add({fmt_lambda(id, lam), tail_inf ? "alpha zero, residual zero" : "alpha positive, residual alpha",
                 l.alpha_zero ? "alpha zero" : "alpha positive", ok, to_json(l)});
        };
        if (!iv.hi_finite()) crosscheck(m, m.expansion_point(), rt, "alpha-right");
        if (!iv.lo_finite()) {
            const SpeedMeasure mr = m.reflected();
            crosscheck(mr, mr.expansion_point(), lt, "alpha-left");
        }
    }

    if (const Evidence* e = r.verdict.find("defect-limit"); e && e->status != EvidenceStatus::not_applicable) {
        const bool one_finite_tail_finite = r.verdict.case_tag == CaseTag::case_i ? rt == TailVerdict::finite
                                                                                  : lt == TailVerdict::finite;
        const bool reaches = e->payload.at("reaches_gap").get<bool>();
        const double lim = e->payload.at("extrapolated_limit").get<double>();
        const double err = e->payload.at("extrapolation_error").get<double>();
        // No defect at all when the process is a martingale.
        const bool ok = one_finite_tail_finite ? reaches : (!reaches && std::abs(lim) <= std::max(1e-4, 3.0 * err));
        add({"defect-limit", one_finite_tail_finite ? "reaches gap" : "zero", reaches ? "reaches gap" : "below gap", ok,
             e->payload});
    }

    if (mc_budget > 0) {
        std::vector<double> times = opts.mc_times;
        std::sort(times.begin(), times.end());
        const PathEnsemble ens = simulate_paths(m, x, times.back(), mc_budget, opts.seed, opts.step, times);
        std::string expected = "none";
        switch (r.verdict.classification) {
        case Classification::martingale: expected = "flat"; break;
        case Classification::strict_supermartingale: expected = "below"; break;
        case Classification::strict_submartingale: expected = "above"; break;
        default: break;
        }
        for (std::size_t i = 0; i < times.size(); ++i) {
            MCCheck c;
            c.t = times[i];
            c.estimate = estimate_stopped_mean(ens, times[i]);
            c.expected = expected;
            const double band = opts.sigmas * c.estimate.std_error;
            const bool last = i + 1 == times.size();
            if (expected == "flat") c.consistent = std::abs(c.estimate.mean - x) <= band;
            if (expected == "below") c.consistent = last ? c.estimate.mean < x - band : c.estimate.mean <= x + band;
            if (expected == "above") c.consistent = last ? c.estimate.mean > x + band : c.estimate.mean >= x - band;
            r.all_consistent = r.all_consistent && c.consistent;
            r.mc.push_back(c);
        }
    }
    return r;
}

json to_json(const AuditReport& r)
{
    json j = to_json(r.verdict);
    json crit = json::array();
    for (const auto& c : r.criteria)
        crit.push_back({{"id", c.id},
                        {"expected", c.expected},
                        {"observed", c.observed},
                        {"consistent", c.consistent},
                        {"detail", c.detail}});
    j["criteria"] = crit;
    json mc = json::array();
    for (const auto& c : r.mc)
        mc.push_back({{"t", c.t}, {"expected", c.expected}, {"consistent", c.consistent}, {"estimate", to_json(c.estimate)}});
    j["mc"] = mc;
    j["all_consistent"] = r.all_consistent;
    return j;
}

void require_consistent(const AuditReport& r)
{
    if (!r.all_consistent) throw InconsistencyError("consistency audit failed:\n" + to_json(r).dump(2));
}

}  // namespace natscale
