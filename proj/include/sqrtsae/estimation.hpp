#pragma once

#include "sqrtsae/model.hpp"

#include <span>
#include <vector>

namespace sqrtsae::estimation {

enum class Method { pr, yl };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

// How the Ybarra-Lohr variance estimator removes measurement-error variance from the
// squared residuals: the default form subtracts beta' Sigma_i beta, the per-replicate
// form subtracts beta' Sigma_i beta / t_i (the variance actually carried by X_hat_i beta).
enum class YlVarianceTerm { published, per_replicate };

struct Estimate {
    ModelParameters params;
    double a_untruncated = 0.0;
    // The normal-equations (or modified) matrix was numerically singular and the
    // Moore-Penrose solution was used.
    bool used_pseudo_inverse = false;
};

// OLS on the surrogate design, then the Prasad-Rao moment estimator of a with hat-matrix
// leverages from the same design. Negative a is reported as 0.
Estimate estimate_pr(std::span<const AreaObservation> areas);

// Equal-weight, single-pass modified least squares that subtracts Sigma_i / t_i from each
// cross-product, followed by the moment estimator of a. Negative a is reported as 0.
Estimate estimate_yl(std::span<const AreaObservation> areas,
                     YlVarianceTerm variance_term = YlVarianceTerm::published);

Estimate estimate(Method method, std::span<const AreaObservation> areas);

// Predictor reports for every area with the given parameters. The theoretical columns use
// X_hat beta in place of X beta and are flagged as surrogate. `bayes` needs true
// covariates and `custom_weight` needs a weight, so both are rejected here.
std::vector<PredictorReport> predict_areas(PredictorKind kind,
                                           std::span<const AreaObservation> areas,
                                           const ModelParameters& params);

struct EmpiricalPrediction {
    Estimate estimate;
    std::vector<PredictorReport> reports;
};

EmpiricalPrediction empirical_predict(PredictorKind kind, std::span<const AreaObservation> areas,
                                      Method method);

}  // namespace sqrtsae::estimation
