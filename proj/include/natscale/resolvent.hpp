#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "natscale/eigen.hpp"

namespace natscale {

// G(x, y) = f_-(min) f_+(max) / h.
double green(const EigenPair& pair, double x, double y);

// Integral over t of exp(-lambda t) E_x[X_{t ^ tau_-} - l_-]:
// (x - l_-)/lambda - alpha_+ f_-(x) / (lambda h). Requires finite l_-.
double stopped_mean_laplace(const EigenPair& pair, double x);

// alpha_+ f_-(x) / h. Requires finite l_-.
double martingale_defect(const EigenPair& pair, double x);

struct TauberianSample {
    double lambda;
    double transform;  // F(lambda)
};

struct TauberianOptions {
    int degree = 2;            // polynomial degree in the extrapolation variable
    bool sqrt_variable = true; // extrapolate in sqrt(lambda) rather than lambda
    double cauchy_tol = 0.1;   // relative agreement of the last two lambda F samples
    double cauchy_abs = 1e-3;  // absolute floor for that comparison
};

struct TauberianResult {
    double limit;
    double error;  // difference between degree d and degree d-1 extrapolants
};

// lambda F(lambda) extrapolated to lambda = 0 through the smallest samples.
TauberianResult tauberian_limit(std::vector<TauberianSample> samples, const TauberianOptions& opts = {});

// Gaver-Stehfest inversion of a Laplace transform at time t.
double stehfest_invert(const std::function<double(double)>& transform, double t, int terms = 12);

// E_x[X_{t ^ tau_-}] by inverting stopped_mean_laplace. The transform is
// evaluated with a tightened ladder tolerance since the inversion amplifies
// noise in it. Requires finite l_-.
double stopped_mean_at(const SpeedMeasure& m, double x, double t, const EigenOptions& opts = {}, int terms = 12);

struct DefectCurve {
    double x = 0.0;
    std::vector<double> lambdas;
    std::vector<double> defect;
    double extrapolated_limit = 0.0;
    double extrapolation_error = 0.0;
    double target_gap = 0.0;
    // |limit - gap| <= max(1e-4, 3 error)
    bool reaches_gap = false;
    // Diagnostic only: defect nondecreasing as lambda decreases.
    bool monotone = false;
};

struct DefectOptions {
    double lambda0 = 0.5;
    int count = 7;  // lambda_k = lambda0 4^-k
    double window_hi = 0.0;  // 0: chosen from x
    EigenOptions eigen;
    TauberianOptions tauberian;
};

// Defect alpha_+ f_-(x)/h over a lambda sweep and its lambda -> 0 limit.
// Rejects l_- = -inf.
DefectCurve defect_curve(const SpeedMeasure& m, double x, const DefectOptions& opts = {});

void write_csv(const DefectCurve& c, std::ostream& os);

}  // namespace natscale
