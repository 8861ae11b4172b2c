#include "sqrtsae/errors.hpp"
#include "sqrtsae/estimation.hpp"
#include "sqrtsae/predictors.hpp"
#include "sqrtsae/simulation.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace sqrtsae;
namespace est = sqrtsae::estimation;

namespace {

struct Synthetic {
    std::vector<AreaObservation> areas;
    Eigen::VectorXd beta;
};

// Areas whose response is exactly X_hat beta, with a diagonal sigma scaled by `sigma_scale`.
Synthetic noiseless(int m, double sigma_scale, unsigned seed = 1) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n(4.0, 1.0);
    Synthetic s;
    s.beta = (Eigen::VectorXd(4) << 1.0, 0.5, 1.5, 2.0).finished();
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd x(4);
        x << 1.0, n(gen), n(gen), n(gen);
        Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(4, 4);
        for (Eigen::Index j = 1; j < 4; ++j) sigma(j, j) = sigma_scale * (0.5 + 0.1 * static_cast<double>(j));
        s.areas.push_back(AreaObservation::make(std::to_string(i), std::nullopt, x.dot(s.beta),
                                                i % 2 ? 10 : 100, x, sigma));
    }
    return s;
}

std::vector<AreaObservation> with_sigma_scale(const std::vector<AreaObservation>& areas, double k) {
    std::vector<AreaObservation> out;
    for (const auto& a : areas) {
        out.push_back(AreaObservation::make(a.area_id(), std::nullopt, a.z(), a.t(), a.x_hat(), k * a.sigma()));
    }
    return out;
}

}  // namespace

TEST(EstimatePr, NoiselessRecovery) {
    const auto s = noiseless(30, 1.0);
    const auto e = est::estimate_pr(s.areas);
    EXPECT_LT((e.params.beta - s.beta).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(e.params.a, 0.0);
    EXPECT_LT(e.a_untruncated, 0.0);
    EXPECT_EQ(e.params.provenance, Provenance::estimated_pr);
}

TEST(EstimateYl, NoiselessRecoveryWithoutMeasurementError) {
    const auto s = noiseless(30, 0.0);
    for (auto term : {est::YlVarianceTerm::published, est::YlVarianceTerm::per_replicate}) {
        const auto e = est::estimate_yl(s.areas, term);
        EXPECT_LT((e.params.beta - s.beta).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_EQ(e.params.a, 0.0);
        EXPECT_EQ(e.params.provenance, Provenance::estimated_yl);
    }
}

TEST(EstimateYl, ZeroSigmaMatchesPr) {
    std::mt19937_64 gen(4);
    std::normal_distribution<double> n(0.0, 1.0);
    auto s = noiseless(40, 1.0);
    std::vector<AreaObservation> noisy;
    for (const auto& a : s.areas) {
        noisy.push_back(AreaObservation::make(a.area_id(), std::nullopt, a.z() + n(gen), a.t(), a.x_hat(), a.sigma()));
    }
    const auto zeroed = with_sigma_scale(noisy, 0.0);
    const auto pr = est::estimate_pr(zeroed);
    const auto yl = est::estimate_yl(zeroed);
    EXPECT_LT((pr.params.beta - yl.params.beta).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(EstimateYl, SingularCorrectedMatrixFallsBack) {
    std::mt19937_64 gen(6);
    std::normal_distribution<double> n(4.0, 1.0);
    std::vector<AreaObservation> areas;
    for (int i = 0; i < 20; ++i) {
        const double v = n(gen);
        Eigen::VectorXd x(3);
        x << 1.0, v, v;
        areas.push_back(AreaObservation::make(std::to_string(i), std::nullopt, 1.0 + v + n(gen) - 4.0, 10, x,
                                              Eigen::MatrixXd::Zero(3, 3)));
    }
    const auto e = est::estimate_yl(areas);
    EXPECT_TRUE(e.used_pseudo_inverse);
    EXPECT_TRUE(e.params.beta.allFinite());
    EXPECT_NEAR(e.params.beta(1), e.params.beta(2), 1e-8);
    const auto p = est::estimate_pr(areas);
    EXPECT_TRUE(p.used_pseudo_inverse);
    EXPECT_TRUE(p.params.beta.allFinite());
}

TEST(Estimate, RequiresMoreAreasThanCovariates) {
    const auto s = noiseless(4, 1.0);
    EXPECT_THROW(est::estimate_pr(s.areas), InputError);
    EXPECT_THROW(est::estimate_yl(s.areas), InputError);
}

TEST(Estimate, AIsNeverNegative) {
    simulation::ScenarioConfig cfg;
    cfg.m = 20;
    cfg.a_true = 0.0;
    const auto design = simulation::generate_scenario(cfg);
    for (std::uint64_t k = 0; k < 200; ++k) {
        const auto data = simulation::run_trial(design, cfg, k);
        const auto pr = est::estimate_pr(data.areas);
        const auto yl = est::estimate_yl(data.areas);
        EXPECT_GE(pr.params.a, 0.0);
        EXPECT_GE(yl.params.a, 0.0);
        EXPECT_EQ(pr.params.a, std::max(0.0, pr.a_untruncated));
        EXPECT_EQ(yl.params.a, std::max(0.0, yl.a_untruncated));
    }
}

TEST(Estimate, PrOverstatesAUnderMeasurementError) {
    simulation::ScenarioConfig cfg;
    cfg.m = 100;
    const auto design = simulation::generate_scenario(cfg);
    double sum = 0.0;
    const int runs = 200;
    for (int k = 0; k < runs; ++k) sum += est::estimate_pr(simulation::run_trial(design, cfg, k).areas).params.a;
    EXPECT_GE(sum / runs, cfg.a_true);
}

TEST(EmpiricalPredict, DirectIgnoresMethod) {
    const auto s = noiseless(30, 1.0);
    const auto pr = est::empirical_predict(PredictorKind::direct, s.areas, est::Method::pr);
    const auto yl = est::empirical_predict(PredictorKind::direct, s.areas, est::Method::yl);
    ASSERT_EQ(pr.reports.size(), s.areas.size());
    for (std::size_t i = 0; i < s.areas.size(); ++i) {
        EXPECT_EQ(pr.reports[i].value, yl.reports[i].value);
        EXPECT_EQ(pr.reports[i].value, predictors::direct_predict(s.areas[i].z()));
    }
}

TEST(EmpiricalPredict, TrueParametersMatchKnownPredictor) {
    const auto s = noiseless(30, 1.0);
    const auto params = ModelParameters::make(0.2, s.beta);
    const auto reports = est::predict_areas(PredictorKind::proposed, s.areas, params);
    for (std::size_t i = 0; i < s.areas.size(); ++i) {
        const auto& obs = s.areas[i];
        const double xb = obs.x_hat().dot(s.beta);
        const auto known = predictors::proposed_predict(obs.z(), xb, derive_profile(params, obs, xb));
        EXPECT_EQ(reports[i].value, known.value);
        EXPECT_TRUE(reports[i].xbeta_is_surrogate);
        EXPECT_EQ(reports[i].area_id, obs.area_id());
    }
    EXPECT_THROW(est::predict_areas(PredictorKind::bayes, s.areas, params), InputError);
}

TEST(Method, Names) {
    EXPECT_EQ(est::parse_method("pr"), est::Method::pr);
    EXPECT_EQ(est::parse_method("yl"), est::Method::yl);
    EXPECT_THROW(est::parse_method("ml"), InputError);
}
