#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sqrtsae {

// Sampling variance of Z = sqrt(Y) for a Poisson count.
inline constexpr double kSamplingVariance = 0.25;

enum class Provenance { known, estimated_pr, estimated_yl };

enum class PredictorKind { bayes, direct, proposed, b_substitute, optimal, custom_weight };

std::string_view to_string(Provenance p);
std::string_view to_string(PredictorKind k);
PredictorKind parse_predictor_kind(std::string_view name);

// One small area as observed: the transformed response, the replication count of the
// secondary survey and the averaged surrogate covariates with the covariance of a single
// surrogate draw. Coordinate 0 of x_hat is the intercept; sigma's row/column 0 are zero.
class AreaObservation {
public:
    // Exactly the validation the data loaders need: y/z consistency, t >= 1,
    // sigma symmetric PSD with zero intercept block, matching dimensions.
    static AreaObservation make(std::string area_id, std::optional<std::int64_t> y,
                                std::optional<double> z, int t, Eigen::VectorXd x_hat,
                                Eigen::MatrixXd sigma);

    // For generators whose sigma was validated once up front: skips the per-area
    // eigenvalue check but still enforces dimensions and t >= 1.
    static AreaObservation from_validated(std::string area_id, double z, int t,
                                          Eigen::VectorXd x_hat, Eigen::MatrixXd sigma);

    const std::string& area_id() const { return area_id_; }
    const std::optional<std::int64_t>& y() const { return y_; }
    double z() const { return z_; }
    int t() const { return t_; }
    const Eigen::VectorXd& x_hat() const { return x_hat_; }
    const Eigen::MatrixXd& sigma() const { return sigma_; }
    Eigen::Index dim() const { return x_hat_.size(); }

private:
    AreaObservation() = default;

    std::string area_id_;
    std::optional<std::int64_t> y_;
    double z_ = 0.0;
    int t_ = 1;
    Eigen::VectorXd x_hat_;
    Eigen::MatrixXd sigma_;
};

struct ModelParameters {
    double a = 0.0;
    Eigen::VectorXd beta;
    Provenance provenance = Provenance::known;

    static ModelParameters make(double a, Eigen::VectorXd beta,
                                Provenance provenance = Provenance::known);
};

// Per-area scalars that every predictor formula is written in.
struct ShrinkageProfile {
    double a = 0.0;
    double b = 0.0;         // beta' Sigma beta
    double b_over_t = 0.0;  // effective measurement-error variance of X_hat beta
    double big_b = 1.0;     // (1/4) / (1/4 + a)
    double gamma = 1.0;     // (1/4) / (1/4 + a + b/t)
    double gamma_a = 0.0;
    double gamma_b = 0.0;
    std::optional<double> gamma_x;  // xbeta^2 / (a + 1/4 + b/t)

    // a + 1/4 + b/t, the variance of Z - X_hat beta.
    double total_variance() const;
};

// Closed-form profile from the scalars alone; used where no AreaObservation exists
// (the mspe subcommand, property tests).
ShrinkageProfile profile_from_scalars(double a, double b, int t,
                                      std::optional<double> xbeta = std::nullopt);

ShrinkageProfile derive_profile(const ModelParameters& params, const AreaObservation& obs,
                                std::optional<double> xbeta_surrogate = std::nullopt);

// b = beta' Sigma beta, with dimension and PSD checks.
double measurement_variance(const Eigen::VectorXd& beta, const Eigen::MatrixXd& sigma);

// Throws InputError unless sigma is square, symmetric, PSD and zero on the intercept row/column.
void validate_sigma(const Eigen::MatrixXd& sigma);

struct PredictorReport {
    std::string area_id;
    PredictorKind kind = PredictorKind::custom_weight;
    double weight = 1.0;
    double correction = 0.0;
    double value = 0.0;
    double value_truncated = 0.0;
    std::optional<double> theoretical_bias;
    std::optional<double> theoretical_mspe;
    // Theoretical columns were computed with X_hat beta standing in for X beta.
    bool xbeta_is_surrogate = false;
};

}  // namespace sqrtsae
