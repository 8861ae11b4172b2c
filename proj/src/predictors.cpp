#include "sqrtsae/predictors.hpp"

#include "sqrtsae/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sqrtsae::predictors {

namespace {

void require_weight(double w) {
    if (!(w >= 0.0 && w <= 1.0)) {
        throw InputError("weight must lie in [0, 1], got " + std::to_string(w));
    }
}

double square(double x) { return x * x; }

}  // namespace

double combined_variance(double w, const ShrinkageProfile& prof) {
    return w * w * (prof.a + kSamplingVariance) + square(1.0 - w) * prof.b_over_t;
}

double bias(double w, const ShrinkageProfile& prof) {
    return combined_variance(w, prof) - prof.a;
}

double correction_constant(double w, const ShrinkageProfile& prof) { return -bias(w, prof); }

double g1(double w, const ShrinkageProfile& prof) {
    const double s = 4.0 * prof.a + 4.0 * prof.b_over_t;
    return (s + 1.0) * w * w - 2.0 * s * w + s;
}

double g2(double w, const ShrinkageProfile& prof) {
    const double a = prof.a;
    const double c = prof.b_over_t;
    const double v = combined_variance(w, prof);
    return 3.0 * v * v - square(v - a) + 3.0 * a * a - 6.0 * a * a * w * w - 0.5 * a * w * w -
           2.0 * a * c * square(1.0 - w);
}

MspeParts mspe_parts(double w, double xbeta, const ShrinkageProfile& prof) {
    require_weight(w);
    return {xbeta * xbeta, g1(w, prof), g2(w, prof)};
}

double mspe_theoretical(double w, double xbeta, const ShrinkageProfile& prof) {
    return mspe_parts(w, xbeta, prof).total();
}

double MspeTerms::sum() const {
    return fourth_moment + correction_sq + lambda_sq + correction_cross_s +
           correction_cross_lambda + lambda_cross_s;
}

MspeTerms mspe_oracle_terms(double w, double xbeta, const ShrinkageProfile& prof) {
    require_weight(w);
    const double a = prof.a;
    const double c = prof.b_over_t;
    const double mu2 = xbeta * xbeta;
    const double mu4 = mu2 * mu2;
    const double v = combined_variance(w, prof);
    const double corr = -(v - a);
    const double e_theta2 = mu2 + a;
    const double e_theta4 = mu4 + 6.0 * mu2 * a + 3.0 * a * a;

    MspeTerms t;
    t.fourth_moment = mu4 + 6.0 * mu2 * v + 3.0 * v * v;
    t.correction_sq = corr * corr;
    t.lambda_sq = e_theta4;
    t.correction_cross_s = 2.0 * corr * (mu2 + v);
    t.correction_cross_lambda = -2.0 * corr * e_theta2;
    t.lambda_cross_s = -2.0 * (w * w * e_theta4 + 0.25 * w * w * e_theta2 +
                               2.0 * w * (1.0 - w) * (mu4 + 3.0 * mu2 * a) +
                               square(1.0 - w) * e_theta2 * (mu2 + c));
    return t;
}

double bayes_predict(double z, double xbeta_true, double a) {
    const double big_b = kSamplingVariance / (kSamplingVariance + a);
    return square((1.0 - big_b) * z + big_b * xbeta_true) + (1.0 - big_b) / 4.0;
}

double bayes_mspe(double xbeta_true, double a) {
    // Weight 1 - B with no measurement error; the Lemma-1 constant is then (1 - B)/4.
    const ShrinkageProfile exact = profile_from_scalars(a, 0.0, 1);
    return mspe_theoretical(1.0 - exact.big_b, xbeta_true, exact);
}

double direct_predict(double z) { return z * z - kSamplingVariance; }

PredictorReport predict_with_weight(double w, double z, double xhat_beta,
                                    const ShrinkageProfile& prof,
                                    std::optional<MspeReference> ref) {
    require_weight(w);
    PredictorReport r;
    r.kind = PredictorKind::custom_weight;
    r.weight = w;
    r.correction = correction_constant(w, prof);
    r.value = square(w * z + (1.0 - w) * xhat_beta) + r.correction;
    r.value_truncated = std::max(0.0, r.value);
    r.theoretical_bias = 0.0;
    if (ref) {
        r.theoretical_mspe = mspe_theoretical(w, ref->xbeta, prof);
        r.xbeta_is_surrogate = ref->surrogate;
    }
    return r;
}

PredictorReport bayes_report(double z, double xbeta_true, const ShrinkageProfile& prof) {
    PredictorReport r;
    r.kind = PredictorKind::bayes;
    r.weight = 1.0 - prof.big_b;
    r.correction = (1.0 - prof.big_b) / 4.0;
    r.value = bayes_predict(z, xbeta_true, prof.a);
    r.value_truncated = std::max(0.0, r.value);
    r.theoretical_bias = 0.0;
    r.theoretical_mspe = bayes_mspe(xbeta_true, prof.a);
    return r;
}

PredictorReport direct_report(double z, const ShrinkageProfile& prof,
                              std::optional<MspeReference> ref) {
    PredictorReport r;
    r.kind = PredictorKind::direct;
    r.weight = 1.0;
    r.correction = -kSamplingVariance;
    r.value = direct_predict(z);
    r.value_truncated = std::max(0.0, r.value);
    r.theoretical_bias = 0.0;
    if (ref) {
        r.theoretical_mspe = mspe_theoretical(1.0, ref->xbeta, prof);
        r.xbeta_is_surrogate = ref->surrogate;
    }
    return r;
}

PredictorReport proposed_predict(double z, double xhat_beta, const ShrinkageProfile& prof,
                                 std::optional<MspeReference> ref) {
    auto r = predict_with_weight(1.0 - prof.gamma, z, xhat_beta, prof, ref);
    r.kind = PredictorKind::proposed;
    return r;
}

double b_substitute_bias(const ShrinkageProfile& prof) {
    return prof.big_b * prof.big_b * prof.b_over_t;
}

PredictorReport b_substitute_predict(double z, double xhat_beta, const ShrinkageProfile& prof,
                                     std::optional<MspeReference> ref) {
    const double w = 1.0 - prof.big_b;
    PredictorReport r;
    r.kind = PredictorKind::b_substitute;
    r.weight = w;
    r.correction = w / 4.0;
    r.value = square(w * z + prof.big_b * xhat_beta) + r.correction;
    r.value_truncated = std::max(0.0, r.value);
    const double bias_b = b_substitute_bias(prof);
    r.theoretical_bias = bias_b;
    if (ref) {
        r.theoretical_mspe = mspe_theoretical(w, ref->xbeta, prof) + bias_b * bias_b;
        r.xbeta_is_surrogate = ref->surrogate;
    }
    return r;
}

numerics::CubicCoefficients g2_derivative_cubic(const ShrinkageProfile& prof) {
    const double ga = prof.gamma_a;
    const double gb = prof.gamma_b;
    return {1.0, -3.0 * gb, 2.0 * gb * gb - ga * ga + gb, -gb * gb};
}

numerics::CubicCoefficients mspe_derivative_cubic(double xbeta, const ShrinkageProfile& prof) {
    const double gx = xbeta * xbeta / prof.total_variance();
    auto c = g2_derivative_cubic(prof);
    c.c1 += gx;
    c.c0 -= (prof.gamma_a + prof.gamma_b) * gx;
    return c;
}

namespace {

// Smallest-weight argmin of f over the in-range roots plus both endpoints.
template <typename F>
std::pair<double, bool> argmin_on_unit_interval(const std::vector<double>& roots, F&& f) {
    double best_w = 0.0;
    double best_f = f(0.0);
    bool interior = false;
    std::vector<double> candidates;
    for (double r : roots) {
        if (r > 0.0 && r < 1.0) candidates.push_back(r);
    }
    candidates.push_back(1.0);
    for (double w : candidates) {
        const double fw = f(w);
        if (fw < best_f) {
            best_f = fw;
            best_w = w;
            interior = w < 1.0;
        }
    }
    return {best_w, interior};
}

}  // namespace

OptimalWeight optimal_weight(double xbeta, const ShrinkageProfile& prof) {
    if (!std::isfinite(xbeta)) throw InputError("xbeta must be finite");
    std::vector<double> roots;
    if (prof.gamma_b == 0.0) {
        // The cubic factors as (w - gamma_a)(w^2 + gamma_a w + gamma_x); the quadratic has no
        // positive root, and gamma_a = 1 - gamma = 1 - B here.
        roots = {1.0 - prof.gamma};
    } else {
        roots = numerics::solve_cubic_real(mspe_derivative_cubic(xbeta, prof));
    }
    auto [w0, interior] = argmin_on_unit_interval(
        roots, [&](double w) { return mspe_theoretical(w, xbeta, prof); });
    return {w0, mspe_theoretical(w0, xbeta, prof), interior};
}

PredictorReport optimal_predict(double z, double xhat_beta, double xbeta_for_weight,
                                const ShrinkageProfile& prof, std::optional<MspeReference> ref) {
    const auto opt = optimal_weight(xbeta_for_weight, prof);
    auto r = predict_with_weight(opt.w0, z, xhat_beta, prof, ref);
    r.kind = PredictorKind::optimal;
    return r;
}

double g2_minimizer(const ShrinkageProfile& prof) {
    const auto roots = numerics::solve_cubic_real(g2_derivative_cubic(prof));
    return argmin_on_unit_interval(roots, [&](double w) { return g2(w, prof); }).first;
}

double weight_gap_bound(double xbeta, const ShrinkageProfile& prof) {
    if (xbeta == 0.0 || !std::isfinite(xbeta)) {
        throw InputError("weight gap bound needs a finite nonzero xbeta");
    }
    const double w2 = g2_minimizer(prof);
    const double gap = std::max(0.0, g2(1.0 - prof.gamma, prof) - g2(w2, prof));
    const double scale = 4.0 * prof.a + 4.0 * prof.b_over_t + 1.0;
    return std::sqrt(gap / (xbeta * xbeta * scale));
}

double negative_probability(double w, double xbeta, const ShrinkageProfile& prof) {
    require_weight(w);
    const double var = combined_variance(w, prof);
    if (var == 0.0) {
        throw NumericError("negative_probability: predictor has zero variance");
    }
    const double c = bias(w, prof);
    if (c <= 0.0) return 0.0;
    const double sd = std::sqrt(var);
    const double root = std::sqrt(c);
    const double lo = (-xbeta - root) / sd;
    const double hi = (-xbeta + root) / sd;
    // Work in whichever tail keeps both CDF values small.
    if (lo > 0.0) return numerics::normal_cdf(-lo) - numerics::normal_cdf(-hi);
    return numerics::normal_cdf(hi) - numerics::normal_cdf(lo);
}

PredictorReport truncate_nonneg(PredictorReport report) {
    report.value_truncated = std::max(0.0, report.value);
    return report;
}

double mle_xbeta(double z, double xhat_beta, const ShrinkageProfile& prof) {
    return prof.gamma_b * z + (1.0 - prof.gamma_b) * xhat_beta;
}

}  // namespace sqrtsae::predictors
