#pragma once

#include "sqrtsae/model.hpp"
#include "sqrtsae/numerics.hpp"

#include <optional>

// Predictors of lambda_i = theta_i^2 of the form {w Z + (1 - w) X_hat beta}^2 + C, with
// their exact bias and MSPE. Every function takes the per-area ShrinkageProfile; the
// profile carries a, b/t and the gamma family so no ModelParameters are needed here.
namespace sqrtsae::predictors {

// Variance of w Z + (1 - w) X_hat beta: w^2 (a + 1/4) + (1 - w)^2 b/t.
double combined_variance(double w, const ShrinkageProfile& prof);

// E[{w Z + (1 - w) X_hat beta}^2 - lambda] for the uncorrected square.
double bias(double w, const ShrinkageProfile& prof);

// The constant that makes the squared predictor unbiased, -bias(w).
double correction_constant(double w, const ShrinkageProfile& prof);

// MSPE = xbeta^2 * g1(w) + g2(w).
struct MspeParts {
    double xbeta_sq = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
    double total() const { return xbeta_sq * g1 + g2; }
};

double g1(double w, const ShrinkageProfile& prof);
double g2(double w, const ShrinkageProfile& prof);
MspeParts mspe_parts(double w, double xbeta, const ShrinkageProfile& prof);

// MSPE of the bias-corrected predictor with weight w. Throws InputError for w outside [0,1].
double mspe_theoretical(double w, double xbeta, const ShrinkageProfile& prof);

// The six expectations whose signed sum is the MSPE, expanded term by term from
// E[(S^2 + C - lambda)^2] with S = w Z + (1 - w) X_hat beta. Independent of g1/g2.
struct MspeTerms {
    double fourth_moment = 0.0;        // E[S^4]
    double correction_sq = 0.0;        // C^2
    double lambda_sq = 0.0;            // E[lambda^2]
    double correction_cross_s = 0.0;   // E[2 C S^2]
    double correction_cross_lambda = 0.0;  // E[-2 C lambda]
    double lambda_cross_s = 0.0;       // E[-2 lambda S^2]
    double sum() const;
};
MspeTerms mspe_oracle_terms(double w, double xbeta, const ShrinkageProfile& prof);

// Bayes predictor with known covariates: {(1-B) z + B xbeta}^2 + (1-B)/4.
double bayes_predict(double z, double xbeta_true, double a);
double bayes_mspe(double xbeta_true, double a);

double direct_predict(double z);

// Reference X beta used for the theoretical columns of a report. When the true value is
// unknown, X_hat beta stands in and `surrogate` is set.
struct MspeReference {
    double xbeta = 0.0;
    bool surrogate = false;
};

PredictorReport predict_with_weight(double w, double z, double xhat_beta,
                                    const ShrinkageProfile& prof,
                                    std::optional<MspeReference> ref = std::nullopt);

PredictorReport bayes_report(double z, double xbeta_true, const ShrinkageProfile& prof);
PredictorReport direct_report(double z, const ShrinkageProfile& prof,
                              std::optional<MspeReference> ref = std::nullopt);
PredictorReport proposed_predict(double z, double xhat_beta, const ShrinkageProfile& prof,
                                 std::optional<MspeReference> ref = std::nullopt);

// {(1-B) z + B xhat_beta}^2 + (1-B)/4: the Bayes predictor with X_hat beta plugged in.
// Its bias is B^2 b/t and its MSPE is mspe_theoretical(1-B) + bias^2.
PredictorReport b_substitute_predict(double z, double xhat_beta, const ShrinkageProfile& prof,
                                     std::optional<MspeReference> ref = std::nullopt);
double b_substitute_bias(const ShrinkageProfile& prof);

// Derivative of the MSPE in w divided by 8 (a + 1/4 + b/t)^2, a monic cubic.
numerics::CubicCoefficients mspe_derivative_cubic(double xbeta, const ShrinkageProfile& prof);
// The g2 part of the same derivative (the cubic above with xbeta = 0).
numerics::CubicCoefficients g2_derivative_cubic(const ShrinkageProfile& prof);

struct OptimalWeight {
    double w0 = 0.0;
    double mspe = 0.0;
    bool interior = false;  // w0 is a root of the derivative cubic inside (0,1)
};

// Minimizer of mspe_theoretical over [0,1]: real roots of the derivative cubic in [0,1]
// and both endpoints are compared; ties go to the smaller weight.
OptimalWeight optimal_weight(double xbeta, const ShrinkageProfile& prof);

// Optimal-weight predictor. xbeta_for_weight is the true X beta when known, otherwise the
// surrogate X_hat beta.
PredictorReport optimal_predict(double z, double xhat_beta, double xbeta_for_weight,
                                const ShrinkageProfile& prof,
                                std::optional<MspeReference> ref = std::nullopt);

// Minimizer of g2 over [0,1].
double g2_minimizer(const ShrinkageProfile& prof);

// Upper bound on |w0 - (1 - gamma)|. Throws InputError for xbeta = 0.
double weight_gap_bound(double xbeta, const ShrinkageProfile& prof);

// P[predictor < 0] for weight w. Zero when the uncorrected bias is not positive.
double negative_probability(double w, double xbeta, const ShrinkageProfile& prof);

PredictorReport truncate_nonneg(PredictorReport report);

// MLE (and UMVUE) of X beta from Z and X_hat beta.
double mle_xbeta(double z, double xhat_beta, const ShrinkageProfile& prof);

}  // namespace sqrtsae::predictors
