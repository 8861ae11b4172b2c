#pragma once

#include "sqrtsae/estimation.hpp"
#include "sqrtsae/model.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace sqrtsae::simulation {

struct TStratum {
    int t = 10;
    double fraction = 0.5;
};

enum class SigmaGen { poisson10_over_10_diagonal, fixed };
enum class ResponseMode { normal_approx, exact_poisson };
enum class XRedraw { fixed_across_trials, redrawn_per_trial };

struct ScenarioConfig {
    int m = 20;
    int trials = 10000;
    std::uint64_t seed = 20240611;
    double a_true = 0.2;
    Eigen::VectorXd beta_true = (Eigen::VectorXd(6) << 1.0, 0.5, 1.5, 1.0, 0.3, 2.0).finished();
    std::vector<TStratum> t_pattern{{10, 0.5}, {100, 0.5}};
    double x_mean = 4.0;
    double x_sd = 1.0;
    SigmaGen sigma_gen = SigmaGen::poisson10_over_10_diagonal;
    // Covariance of the non-intercept covariates, k x k with k = beta_true.size() - 1.
    // Used when sigma_gen is `fixed`.
    Eigen::MatrixXd sigma_fixed;
    ResponseMode response_mode = ResponseMode::normal_approx;
    XRedraw x_redraw = XRedraw::fixed_across_trials;
    // Draw e_i ~ N(0, 1/4). Off only for noiseless checks.
    bool sampling_error = true;
    estimation::YlVarianceTerm yl_variance_term = estimation::YlVarianceTerm::published;

    // Throws InputError on the first violated constraint.
    void validate() const;
};

std::string_view to_string(SigmaGen g);
std::string_view to_string(ResponseMode r);
std::string_view to_string(XRedraw x);

// Fixed part of a scenario: true covariates, the shared measurement covariance and the
// replication count of each area.
struct Design {
    Eigen::MatrixXd x;          // m x p, column 0 all ones
    Eigen::MatrixXd sigma;      // p x p, zero intercept row/column
    Eigen::MatrixXd sigma_root; // symmetric square root of sigma
    std::vector<int> t;
    Eigen::VectorXd xbeta;      // X beta_true
};

Design generate_scenario(const ScenarioConfig& config);

struct TrialData {
    Eigen::VectorXd lambda;
    Eigen::VectorXd xbeta;  // true X beta used in this trial
    std::vector<AreaObservation> areas;
};

// Substream (seed, trial_index) drives the trial, so results do not depend on the order
// in which trials run.
TrialData run_trial(const Design& design, const ScenarioConfig& config, std::uint64_t trial_index);

// The eleven predictors compared in the study.
enum class StudyPredictor {
    bp, direct, p, p_pr, p_yl, b, b_pr, b_yl, opt, opt_pr, opt_yl
};
inline constexpr std::size_t kStudyPredictorCount = 11;
inline constexpr std::array<StudyPredictor, kStudyPredictorCount> kStudyPredictors{
    StudyPredictor::bp,   StudyPredictor::direct, StudyPredictor::p,      StudyPredictor::p_pr,
    StudyPredictor::p_yl, StudyPredictor::b,      StudyPredictor::b_pr,   StudyPredictor::b_yl,
    StudyPredictor::opt,  StudyPredictor::opt_pr, StudyPredictor::opt_yl};

std::string_view label(StudyPredictor p);
PredictorKind kind_of(StudyPredictor p);
Provenance provenance_of(StudyPredictor p);
bool uses_known_parameters(StudyPredictor p);

struct SimulationSummary {
    StudyPredictor predictor = StudyPredictor::bp;
    int stratum = 0;  // the t value of the averaged areas
    int areas = 0;
    double empirical_bias = 0.0;
    double empirical_mspe = 0.0;
    double bias_standard_error = 0.0;
    double mc_standard_error = 0.0;  // of empirical_mspe
    int trials = 0;
    // Averages over the stratum's areas; only for known-parameter predictors on a fixed design.
    std::optional<double> theoretical_bias;
    std::optional<double> theoretical_mspe;
};

// Per-area figures for a designated area.
struct AreaDetail {
    int area_index = 0;  // zero-based
    int t = 0;
    double xbeta = 0.0;
    StudyPredictor predictor = StudyPredictor::bp;
    double empirical_bias = 0.0;
    double empirical_mspe = 0.0;
    double mc_standard_error = 0.0;
    double mean_weight = 0.0;
    std::optional<double> theoretical_bias;
    std::optional<double> theoretical_mspe;
};

struct StudyResult {
    std::vector<SimulationSummary> summaries;  // predictor-major, strata ascending in t
    std::vector<AreaDetail> detail;            // areas 1 and m
    std::array<std::int64_t, kStudyPredictorCount> negative_counts{};
    std::int64_t pr_fallback_trials = 0;
    std::int64_t yl_fallback_trials = 0;
    // Largest negative-value probability over areas for the corrected known-parameter
    // predictors (direct, P, optimal), evaluated at the true X beta.
    double max_negative_probability = 0.0;
    std::vector<int> strata;
    Design design;

    const SimulationSummary& summary(StudyPredictor p, int stratum) const;
};

// Runs config.trials seeded trials on `threads` workers. Results are bit-identical for any
// thread count.
StudyResult run_study(const ScenarioConfig& config, unsigned threads = 1);

}  // namespace sqrtsae::simulation
