#include "sqrtsae/errors.hpp"
#include "sqrtsae/predictors.hpp"
#include "sqrtsae/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sqrtsae;
using namespace sqrtsae::simulation;

namespace {

ScenarioConfig small_config(int trials) {
    ScenarioConfig c;
    c.trials = trials;
    return c;
}

bool same_summaries(const StudyResult& x, const StudyResult& y) {
    if (x.summaries.size() != y.summaries.size()) return false;
    for (std::size_t k = 0; k < x.summaries.size(); ++k) {
        const auto& a = x.summaries[k];
        const auto& b = y.summaries[k];
        if (a.empirical_bias != b.empirical_bias || a.empirical_mspe != b.empirical_mspe ||
            a.mc_standard_error != b.mc_standard_error || a.bias_standard_error != b.bias_standard_error) {
            return false;
        }
    }
    return x.negative_counts == y.negative_counts;
}

}  // namespace

TEST(Config, Validation) {
    ScenarioConfig c;
    EXPECT_NO_THROW(c.validate());
    c.trials = -1;
    EXPECT_THROW(c.validate(), InputError);
    c = ScenarioConfig{};
    c.t_pattern = {{10, 0.5}, {100, 0.4}};
    EXPECT_THROW(c.validate(), InputError);
    c = ScenarioConfig{};
    c.beta_true = Eigen::VectorXd::Ones(1);
    EXPECT_THROW(c.validate(), InputError);
    c = ScenarioConfig{};
    c.a_true = -0.2;
    EXPECT_THROW(c.validate(), InputError);
    c = ScenarioConfig{};
    c.sigma_gen = SigmaGen::fixed;
    c.sigma_fixed = Eigen::MatrixXd::Zero(2, 2);
    EXPECT_THROW(c.validate(), InputError);
}

TEST(Scenario, CovariateMoments) {
    ScenarioConfig c;
    c.m = 10000;
    const auto d = generate_scenario(c);
    const double n = static_cast<double>(c.m);
    const double mean = d.xbeta.mean();
    const double sd = std::sqrt((d.xbeta.array() - mean).square().sum() / (n - 1));
    EXPECT_LT(std::abs(mean - 22.2), 4 * std::sqrt(7.59 / n));
    EXPECT_NEAR(sd, std::sqrt(7.59), 4 * std::sqrt(7.59 / (2 * n)));
    EXPECT_EQ(d.x.col(0), Eigen::VectorXd::Ones(c.m));
}

TEST(Scenario, SigmaShapeAndStrata) {
    const ScenarioConfig c;
    const auto d = generate_scenario(c);
    EXPECT_EQ(d.sigma.row(0).norm(), 0.0);
    EXPECT_EQ(d.sigma.col(0).norm(), 0.0);
    for (Eigen::Index i = 1; i < d.sigma.rows(); ++i) {
        EXPECT_GE(d.sigma(i, i), 0.0);
        EXPECT_EQ(std::round(d.sigma(i, i) * 10), d.sigma(i, i) * 10);
        for (Eigen::Index j = 1; j < d.sigma.cols(); ++j) {
            if (i != j) EXPECT_EQ(d.sigma(i, j), 0.0);
        }
    }
    int tens = 0;
    for (int t : d.t) tens += t == 10;
    EXPECT_EQ(tens, 10);
    EXPECT_EQ(d.t.front(), 10);
    EXPECT_EQ(d.t.back(), 100);
}

TEST(Scenario, FixedZeroSigmaAndDeterminism) {
    ScenarioConfig c;
    c.sigma_gen = SigmaGen::fixed;
    c.sigma_fixed = Eigen::MatrixXd::Zero(5, 5);
    const auto d = generate_scenario(c);
    EXPECT_EQ(measurement_variance(c.beta_true, d.sigma), 0.0);

    const ScenarioConfig def;
    const auto a = generate_scenario(def);
    const auto b = generate_scenario(def);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.sigma, b.sigma);
    EXPECT_EQ(a.t, b.t);
}

TEST(Trial, AllNoiseOff) {
    ScenarioConfig c;
    c.a_true = 0.0;
    c.sampling_error = false;
    c.sigma_gen = SigmaGen::fixed;
    c.sigma_fixed = Eigen::MatrixXd::Zero(5, 5);
    const auto d = generate_scenario(c);
    const auto data = run_trial(d, c, 3);
    for (std::size_t i = 0; i < data.areas.size(); ++i) {
        const double xb = d.xbeta(static_cast<Eigen::Index>(i));
        EXPECT_EQ(data.areas[i].z(), xb);
        EXPECT_EQ(data.lambda(static_cast<Eigen::Index>(i)), xb * xb);
        EXPECT_EQ(data.areas[i].x_hat(), d.x.row(static_cast<Eigen::Index>(i)).transpose());
    }
}

TEST(Trial, NormalApproxVariance) {
    ScenarioConfig c;
    c.m = 7;
    c.t_pattern = {{10, 1.0}};
    c.trials = 1;
    const auto d = generate_scenario(c);
    const int reps = 1000000;
    double sum = 0.0, sq = 0.0, q4 = 0.0;
    const double mu = d.xbeta(0);
    for (int k = 0; k < reps; ++k) {
        const double r = run_trial(d, c, static_cast<std::uint64_t>(k)).areas[0].z() - mu;
        sum += r;
        sq += r * r;
        q4 += r * r * r * r;
    }
    const double mean = sum / reps;
    const double var = sq / reps - mean * mean;
    const double se = std::sqrt((q4 / reps - var * var) / reps);
    EXPECT_LT(std::abs(var - (c.a_true + 0.25)), 3 * se);
}

TEST(Trial, ExactPoissonStabilizesVariance) {
    ScenarioConfig c;
    c.m = 4;
    c.t_pattern = {{10, 1.0}};
    c.a_true = 0.0;
    c.beta_true = (Eigen::VectorXd(2) << 20.0, 0.0).finished();
    c.sigma_gen = SigmaGen::fixed;
    c.sigma_fixed = Eigen::MatrixXd::Zero(1, 1);
    c.response_mode = ResponseMode::exact_poisson;
    const auto d = generate_scenario(c);
    double sum = 0.0, sq = 0.0, q4 = 0.0;
    int n = 0;
    for (int k = 0; k < 250000; ++k) {
        const auto data = run_trial(d, c, static_cast<std::uint64_t>(k));
        for (const auto& a : data.areas) {
            EXPECT_EQ(data.lambda(0), 400.0);
            const double r = a.z() - 20.0;
            sum += r;
            sq += r * r;
            q4 += r * r * r * r;
            ++n;
        }
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    const double se = std::sqrt((q4 / n - var * var) / n);
    EXPECT_LT(std::abs(var - 0.25), 3 * se);
}

TEST(Study, DeterministicAcrossThreadCounts) {
    const auto c = small_config(300);
    const auto one = run_study(c, 1);
    const auto again = run_study(c, 1);
    const auto many = run_study(c, 8);
    EXPECT_TRUE(same_summaries(one, again));
    EXPECT_TRUE(same_summaries(one, many));
    ASSERT_EQ(one.detail.size(), many.detail.size());
    for (std::size_t k = 0; k < one.detail.size(); ++k) {
        EXPECT_EQ(one.detail[k].empirical_mspe, many.detail[k].empirical_mspe);
    }
}

TEST(Study, KnownPredictorsAgreeWithTheory) {
    const ScenarioConfig c;
    const auto r = run_study(c, 4);
    ASSERT_EQ(r.strata, (std::vector<int>{10, 100}));
    for (auto p : kStudyPredictors) {
        for (int t : r.strata) {
            const auto& s = r.summary(p, t);
            EXPECT_EQ(s.trials, c.trials);
            EXPECT_EQ(s.areas, 10);
            if (!uses_known_parameters(p)) {
                EXPECT_FALSE(s.theoretical_mspe.has_value());
                continue;
            }
            ASSERT_TRUE(s.theoretical_mspe.has_value());
            // Stratum averages pool 10 areas, so a 3 SE band keeps the family false-alarm
            // rate small while still detecting formula errors of a few percent.
            EXPECT_LT(std::abs(s.empirical_mspe - *s.theoretical_mspe), 3 * s.mc_standard_error)
                << label(p) << " t=" << t;
            EXPECT_LT(std::abs(s.empirical_bias - *s.theoretical_bias), 3 * s.bias_standard_error)
                << label(p) << " t=" << t;
        }
    }
    EXPECT_GT(r.summary(StudyPredictor::b, 10).empirical_mspe, r.summary(StudyPredictor::direct, 10).empirical_mspe);
    for (int t : r.strata) {
        EXPECT_LE(*r.summary(StudyPredictor::opt, t).theoretical_mspe,
                  *r.summary(StudyPredictor::p, t).theoretical_mspe * (1 + 1e-3));
        EXPECT_LE(*r.summary(StudyPredictor::opt, t).theoretical_mspe, *r.summary(StudyPredictor::p, t).theoretical_mspe);
    }
    // P gains from the larger secondary survey; direct MSPE is (X beta)^2 + a + 1/8 either way.
    const double p_ratio = r.summary(StudyPredictor::p, 100).empirical_mspe / r.summary(StudyPredictor::p, 10).empirical_mspe;
    const double d_ratio = r.summary(StudyPredictor::direct, 100).empirical_mspe /
                           r.summary(StudyPredictor::direct, 10).empirical_mspe;
    EXPECT_LT(p_ratio, 0.8 * d_ratio);
    for (auto n : r.negative_counts) EXPECT_EQ(n, 0);
    EXPECT_LT(r.max_negative_probability, 1e-15);
}

TEST(Study, RecoveryWithoutMeasurementError) {
    ScenarioConfig c;
    c.trials = 500;
    c.sigma_gen = SigmaGen::fixed;
    c.sigma_fixed = Eigen::MatrixXd::Zero(5, 5);
    const auto r = run_study(c, 2);
    for (int t : r.strata) {
        const auto& p = r.summary(StudyPredictor::p, t);
        const auto& bp = r.summary(StudyPredictor::bp, t);
        EXPECT_NEAR(p.empirical_mspe, bp.empirical_mspe, 1e-9 * bp.empirical_mspe);
        EXPECT_NEAR(*p.theoretical_mspe, *bp.theoretical_mspe, 1e-9 * bp.empirical_mspe);
    }
}

TEST(Study, RedrawnDesignRuns) {
    ScenarioConfig c;
    c.trials = 50;
    c.x_redraw = XRedraw::redrawn_per_trial;
    const auto r = run_study(c, 2);
    EXPECT_FALSE(r.summary(StudyPredictor::p, 10).theoretical_mspe.has_value());
    EXPECT_GT(r.summary(StudyPredictor::direct, 10).empirical_mspe, 0.0);
}

TEST(Study, Labels) {
    EXPECT_EQ(label(StudyPredictor::opt_yl), "opt_YL");
    EXPECT_EQ(kind_of(StudyPredictor::b_pr), PredictorKind::b_substitute);
    EXPECT_EQ(provenance_of(StudyPredictor::p_yl), Provenance::estimated_yl);
    EXPECT_TRUE(uses_known_parameters(StudyPredictor::bp));
}
