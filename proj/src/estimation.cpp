#include "sqrtsae/estimation.hpp"

#include "sqrtsae/errors.hpp"
#include "sqrtsae/numerics.hpp"
#include "sqrtsae/predictors.hpp"

#include <string>

namespace sqrtsae::estimation {

std::string_view to_string(Method m) { return m == Method::pr ? "pr" : "yl"; }

Method parse_method(std::string_view name) {
    if (name == "pr") return Method::pr;
    if (name == "yl") return Method::yl;
    throw InputError("unknown estimation method '" + std::string(name) + "'");
}

namespace {

struct Stacked {
    Eigen::MatrixXd x_hat;
    Eigen::VectorXd z;
};

Stacked stack(std::span<const AreaObservation> areas) {
    if (areas.empty()) throw InputError("no areas to estimate from");
    const Eigen::Index p = areas.front().dim();
    const auto m = static_cast<Eigen::Index>(areas.size());
    if (m <= p) {
        throw InputError("estimation needs more areas than covariates (m=" + std::to_string(m) +
                         ", p=" + std::to_string(p) + ")");
    }
    Stacked s{Eigen::MatrixXd(m, p), Eigen::VectorXd(m)};
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& obs = areas[static_cast<std::size_t>(i)];
        if (obs.dim() != p) throw InputError("areas disagree on the covariate dimension");
        s.x_hat.row(i) = obs.x_hat().transpose();
        s.z(i) = obs.z();
    }
    return s;
}

}  // namespace

Estimate estimate_pr(std::span<const AreaObservation> areas) {
    const auto [x_hat, z] = stack(areas);
    const Eigen::Index m = x_hat.rows();
    const Eigen::Index p = x_hat.cols();

    const auto fit = numerics::least_squares_solve(x_hat, z);
    const Eigen::VectorXd resid = z - x_hat * fit.x;

    const Eigen::MatrixXd gram = x_hat.transpose() * x_hat;
    const Eigen::MatrixXd gram_inv_xt = fit.used_pseudo_inverse
                                            ? Eigen::MatrixXd(numerics::pseudo_inverse(gram) *
                                                              x_hat.transpose())
                                            : Eigen::MatrixXd(gram.ldlt().solve(x_hat.transpose()));
    double unexplained = 0.0;  // sum of (1 - h_ii)
    for (Eigen::Index i = 0; i < m; ++i) {
        unexplained += 1.0 - x_hat.row(i).dot(gram_inv_xt.col(i));
    }
    const double a_raw =
        (resid.squaredNorm() - kSamplingVariance * unexplained) / static_cast<double>(m - p);

    Estimate est;
    est.params = ModelParameters{std::max(0.0, a_raw), fit.x, Provenance::estimated_pr};
    est.a_untruncated = a_raw;
    est.used_pseudo_inverse = fit.used_pseudo_inverse;
    return est;
}

Estimate estimate_yl(std::span<const AreaObservation> areas, YlVarianceTerm variance_term) {
    const auto [x_hat, z] = stack(areas);
    const Eigen::Index m = x_hat.rows();
    const Eigen::Index p = x_hat.cols();

    Eigen::MatrixXd corrected = x_hat.transpose() * x_hat;
    for (const auto& obs : areas) corrected -= obs.sigma() / static_cast<double>(obs.t());
    const Eigen::VectorXd rhs = x_hat.transpose() * z;
    const auto sol = numerics::pseudo_solve(corrected, rhs);
    const Eigen::VectorXd& beta = sol.x;

    double total = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& obs = areas[static_cast<std::size_t>(i)];
        const double r = z(i) - x_hat.row(i).dot(beta);
        double me = measurement_variance(beta, obs.sigma());
        if (variance_term == YlVarianceTerm::per_replicate) me /= static_cast<double>(obs.t());
        total += r * r - me - kSamplingVariance;
    }
    const double a_raw = total / static_cast<double>(m - p);

    Estimate est;
    est.params = ModelParameters{std::max(0.0, a_raw), beta, Provenance::estimated_yl};
    est.a_untruncated = a_raw;
    est.used_pseudo_inverse = sol.used_pseudo_inverse;
    return est;
}

Estimate estimate(Method method, std::span<const AreaObservation> areas) {
    return method == Method::pr ? estimate_pr(areas) : estimate_yl(areas);
}

std::vector<PredictorReport> predict_areas(PredictorKind kind,
                                           std::span<const AreaObservation> areas,
                                           const ModelParameters& params) {
    if (kind == PredictorKind::bayes) {
        throw InputError("the Bayes predictor needs the true covariates X, not surrogates");
    }
    if (kind == PredictorKind::custom_weight) {
        throw InputError("custom_weight needs an explicit weight");
    }
    std::vector<PredictorReport> out;
    out.reserve(areas.size());
    for (const auto& obs : areas) {
        const double xhat_beta = obs.x_hat().dot(params.beta);
        const auto prof = derive_profile(params, obs, xhat_beta);
        const predictors::MspeReference ref{xhat_beta, true};
        PredictorReport r;
        switch (kind) {
            case PredictorKind::direct: r = predictors::direct_report(obs.z(), prof, ref); break;
            case PredictorKind::proposed:
                r = predictors::proposed_predict(obs.z(), xhat_beta, prof, ref);
                break;
            case PredictorKind::b_substitute:
                r = predictors::b_substitute_predict(obs.z(), xhat_beta, prof, ref);
                break;
            case PredictorKind::optimal:
                r = predictors::optimal_predict(obs.z(), xhat_beta, xhat_beta, prof, ref);
                break;
            default: break;
        }
        r.area_id = obs.area_id();
        out.push_back(std::move(r));
    }
    return out;
}

EmpiricalPrediction empirical_predict(PredictorKind kind, std::span<const AreaObservation> areas,
                                      Method method) {
    auto est = estimate(method, areas);
    auto reports = predict_areas(kind, areas, est.params);
    return {std::move(est), std::move(reports)};
}

}  // namespace sqrtsae::estimation
