#include "sqrtsae/model.hpp"

#include "sqrtsae/errors.hpp"

#include <cmath>
#include <sstream>

namespace sqrtsae {

std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::known: return "true";
        case Provenance::estimated_pr: return "estimated_pr";
        case Provenance::estimated_yl: return "estimated_yl";
    }
    return "unknown";
}

std::string_view to_string(PredictorKind k) {
    switch (k) {
        case PredictorKind::bayes: return "bayes";
        case PredictorKind::direct: return "direct";
        case PredictorKind::proposed: return "proposed";
        case PredictorKind::b_substitute: return "b_substitute";
        case PredictorKind::optimal: return "optimal";
        case PredictorKind::custom_weight: return "custom_weight";
    }
    return "unknown";
}

PredictorKind parse_predictor_kind(std::string_view name) {
    for (auto k : {PredictorKind::bayes, PredictorKind::direct, PredictorKind::proposed,
                   PredictorKind::b_substitute, PredictorKind::optimal,
                   PredictorKind::custom_weight}) {
        if (to_string(k) == name) return k;
    }
    throw InputError("unknown predictor kind '" + std::string(name) + "'");
}

void validate_sigma(const Eigen::MatrixXd& sigma) {
    if (sigma.rows() != sigma.cols()) throw InputError("sigma must be square");
    if (sigma.size() == 0) return;
    if (!sigma.allFinite()) throw InputError("sigma has non-finite entries");
    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InputError("sigma is not symmetric");
    }
    if ((sigma.row(0).array() != 0.0).any() || (sigma.col(0).array() != 0.0).any()) {
        throw InputError("sigma must have a zero intercept row and column");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
        throw InputError("sigma is not positive semidefinite");
    }
}

AreaObservation AreaObservation::make(std::string area_id, std::optional<std::int64_t> y,
                                      std::optional<double> z, int t, Eigen::VectorXd x_hat,
                                      Eigen::MatrixXd sigma) {
    if (!y && !z) throw InputError("area '" + area_id + "': one of y or z is required");
    if (y && *y < 0) throw InputError("area '" + area_id + "': y must be nonnegative");
    double zval;
    if (y) {
        const double root = std::sqrt(static_cast<double>(*y));
        if (z && std::abs(*z - root) > 1e-12 * std::max(1.0, root)) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "area '" << area_id << "': z=" << *z << " disagrees with sqrt(y)=" << root;
            throw InputError(msg.str());
        }
        zval = root;
    } else {
        zval = *z;
    }
    if (!std::isfinite(zval)) throw InputError("area '" + area_id + "': z is not finite");
    if (t < 1) throw InputError("area '" + area_id + "': t must be >= 1");
    if (x_hat.size() == 0) throw InputError("area '" + area_id + "': empty covariate vector");
    if (!x_hat.allFinite()) throw InputError("area '" + area_id + "': non-finite covariate");
    if (sigma.rows() != x_hat.size() || sigma.cols() != x_hat.size()) {
        throw InputError("area '" + area_id + "': sigma dimension does not match x_hat");
    }
    validate_sigma(sigma);

    AreaObservation obs;
    obs.area_id_ = std::move(area_id);
    obs.y_ = y;
    obs.z_ = zval;
    obs.t_ = t;
    obs.x_hat_ = std::move(x_hat);
    obs.sigma_ = std::move(sigma);
    return obs;
}

AreaObservation AreaObservation::from_validated(std::string area_id, double z, int t,
                                                Eigen::VectorXd x_hat, Eigen::MatrixXd sigma) {
    if (t < 1) throw InputError("t must be >= 1");
    if (sigma.rows() != x_hat.size() || sigma.cols() != x_hat.size()) {
        throw InputError("sigma dimension does not match x_hat");
    }
    AreaObservation obs;
    obs.area_id_ = std::move(area_id);
    obs.z_ = z;
    obs.t_ = t;
    obs.x_hat_ = std::move(x_hat);
    obs.sigma_ = std::move(sigma);
    return obs;
}

ModelParameters ModelParameters::make(double a, Eigen::VectorXd beta, Provenance provenance) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw InputError("a must be finite and >= 0");
    if (beta.size() == 0 || !beta.allFinite()) throw InputError("beta must be finite, nonempty");
    return ModelParameters{a, std::move(beta), provenance};
}

double ShrinkageProfile::total_variance() const {
    // gamma = (1/4) / D
    return kSamplingVariance / gamma;
}

ShrinkageProfile profile_from_scalars(double a, double b, int t, std::optional<double> xbeta) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw InputError("a must be finite and >= 0");
    if (!(b >= 0.0) || !std::isfinite(b)) throw InputError("b must be finite and >= 0");
    if (t < 1) throw InputError("t must be >= 1");

    ShrinkageProfile p;
    p.a = a;
    p.b = b;
    p.b_over_t = b / t;
    const double d = a + kSamplingVariance + p.b_over_t;
    p.big_b = kSamplingVariance / (kSamplingVariance + a);
    p.gamma = kSamplingVariance / d;
    p.gamma_a = a / d;
    p.gamma_b = p.b_over_t / d;
    if (xbeta) p.gamma_x = (*xbeta) * (*xbeta) / d;
    return p;
}

double measurement_variance(const Eigen::VectorXd& beta, const Eigen::MatrixXd& sigma) {
    if (sigma.rows() != beta.size() || sigma.cols() != beta.size()) {
        throw InputError("dimension mismatch between beta and sigma");
    }
    // Rounding can leave a PSD quadratic form a hair below zero.
    return std::max(0.0, beta.dot(sigma * beta));
}

ShrinkageProfile derive_profile(const ModelParameters& params, const AreaObservation& obs,
                                std::optional<double> xbeta_surrogate) {
    if (params.beta.size() != obs.dim()) {
        throw InputError("area '" + obs.area_id() + "': beta has length " +
                         std::to_string(params.beta.size()) + ", covariates have length " +
                         std::to_string(obs.dim()));
    }
    const double b = measurement_variance(params.beta, obs.sigma());
    return profile_from_scalars(params.a, b, obs.t(), xbeta_surrogate);
}

}  // namespace sqrtsae
