#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "natscale/eigen.hpp"
#include "natscale/measure.hpp"
#include "natscale/resolvent.hpp"
#include "natscale/simulate.hpp"

namespace natscale {

enum class Classification { martingale, strict_submartingale, strict_supermartingale, strict_local_martingale_only };
std::string to_string(Classification c);
// "CaseI", "CaseIMirrored", "CaseII", "Bounded"
std::string case_name(CaseTag c);

enum class EvidenceStatus { pass, fail, not_applicable };
std::string to_string(EvidenceStatus s);

// `pass` means the item supports the martingale property on its side.
struct Evidence {
    std::string id;
    EvidenceStatus status = EvidenceStatus::not_applicable;
    nlohmann::json payload = nlohmann::json::object();
};

struct Verdict {
    CaseTag case_tag = CaseTag::case_ii;
    Classification classification = Classification::martingale;
    double x = 0.0;
    double lambda = 0.0;
    std::vector<Evidence> evidence;

    const Evidence* find(const std::string& id) const;
};
nlohmann::json to_json(const Verdict& v);

// Decision from the tail-moment verdicts alone.
Classification decide(CaseTag c, TailVerdict left, TailVerdict right);

struct ClassifyOptions {
    EigenOptions eigen;
    // Skip the lambda sweep behind the defect evidence.
    bool defect_evidence = true;
    DefectOptions defect;
    double divergence_factor = 1.5;
    double divergence_threshold = 1e6;
    double cauchy_tol = 1e-6;
};

// Throws RefusedVerdict when a tail verdict cannot be decided.
Verdict classify(const SpeedMeasure& m, double x, double lambda_probe, const ClassifyOptions& opts = {});

struct SideDivergence {
    LimitKind kind = LimitKind::not_applicable;
    std::vector<LadderPoint> trace;
};

// Right: f'_-(z) as z -> +inf. Left: f'_+(z) as z -> -inf, reported with
// its sign (so the divergent case runs to -inf).
struct DivergenceReport {
    SideDivergence right;
    SideDivergence left;
};
DivergenceReport fprime_divergence(const SpeedMeasure& m, double lambda, const ClassifyOptions& opts = {});

struct AlphaTailReport {
    bool applicable = false;  // l+ = +inf
    bool alpha_zero = false;
    bool tail_infinite = false;
    // f_+(x) - lambda int_x^inf (y - x) f_+(y) m(dy), in the pair's
    // normalization, and divided by f_+(x).
    double identity_residual = 0.0;
    double identity_relative = 0.0;
    double x = 0.0;
    AlphaEstimate alpha;
};
// The three conditions evaluated independently at the expansion point (or
// at x when given): alpha_+ from the flag-free estimator, the tail from the
// measure, the residual by quadrature of the solver's f_+.
AlphaTailReport alpha_tail_crosscheck(const SpeedMeasure& m, double lambda, const ClassifyOptions& opts = {});
AlphaTailReport alpha_tail_crosscheck(const SpeedMeasure& m, double lambda, double x, const ClassifyOptions& opts = {});
nlohmann::json to_json(const AlphaTailReport& r);

struct CriterionCheck {
    std::string id;
    std::string expected;
    std::string observed;
    bool consistent = true;
    nlohmann::json detail = nlohmann::json::object();
};

struct MCCheck {
    double t = 0.0;
    MCEstimate estimate;
    std::string expected;  // "flat", "below", "above", "none"
    bool consistent = true;
};

struct AuditReport {
    Verdict verdict;
    std::vector<CriterionCheck> criteria;
    std::vector<MCCheck> mc;
    bool all_consistent = true;
};
nlohmann::json to_json(const AuditReport& r);

struct AuditOptions {
    ClassifyOptions classify;
    std::vector<double> lambdas;  // empty: just the probe lambda
    std::vector<double> mc_times{1.0, 5.0};
    std::uint64_t seed = 20240601;
    StepControl step;
    double sigmas = 3.0;
    // Relative tolerance on the integral identity residual when the tail is infinite.
    double residual_tol = 1e-7;
};

// Cross-checks the tail verdicts against the eigenfunction criteria, the
// defect limit and (mc_budget > 0) a Monte Carlo run from x.
AuditReport consistency_audit(const SpeedMeasure& m, double x, double lambda, std::size_t mc_budget,
                              const AuditOptions& opts = {});

// Throws InconsistencyError carrying the JSON dump when the audit failed.
void require_consistent(const AuditReport& r);

}  // namespace natscale
