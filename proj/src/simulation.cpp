#include "sqrtsae/simulation.hpp"

#include "sqrtsae/errors.hpp"
#include "sqrtsae/predictors.hpp"
#include "sqrtsae/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace sqrtsae::simulation {

namespace pred = sqrtsae::predictors;

namespace {

// Substream reserved for the design so it never collides with a trial index.
constexpr std::uint64_t kDesignSubstream = 0xFFFF'FFFF'FFFF'FFFFull;

double square(double x) { return x * x; }

}  // namespace

std::string_view to_string(SigmaGen g) {
    return g == SigmaGen::fixed ? "fixed" : "poisson10_over_10_diagonal";
}
std::string_view to_string(ResponseMode r) {
    return r == ResponseMode::exact_poisson ? "exact_poisson" : "normal_approx";
}
std::string_view to_string(XRedraw x) {
    return x == XRedraw::redrawn_per_trial ? "redrawn_per_trial" : "fixed_across_trials";
}

void ScenarioConfig::validate() const {
    if (m < 1) throw InputError("m must be positive");
    if (trials < 1) throw InputError("trials must be positive");
    if (!(a_true >= 0.0) || !std::isfinite(a_true)) throw InputError("a_true must be >= 0");
    if (beta_true.size() < 2) {
        throw InputError("beta_true needs an intercept and at least one covariate");
    }
    if (!beta_true.allFinite()) throw InputError("beta_true must be finite");
    if (!std::isfinite(x_mean) || !(x_sd >= 0.0) || !std::isfinite(x_sd)) {
        throw InputError("x_mean must be finite and x_sd >= 0");
    }
    if (t_pattern.empty()) throw InputError("t_pattern must not be empty");
    double total = 0.0;
    for (const auto& s : t_pattern) {
        if (s.t < 1) throw InputError("t_pattern: t must be >= 1");
        if (!(s.fraction >= 0.0)) throw InputError("t_pattern: fractions must be >= 0");
        total += s.fraction;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InputError("t_pattern fractions must sum to 1");
    if (sigma_gen == SigmaGen::fixed) {
        const Eigen::Index k = beta_true.size() - 1;
        if (sigma_fixed.rows() != k || sigma_fixed.cols() != k) {
            throw InputError("fixed sigma must be " + std::to_string(k) + " x " +
                             std::to_string(k));
        }
        Eigen::MatrixXd full = Eigen::MatrixXd::Zero(k + 1, k + 1);
        full.bottomRightCorner(k, k) = sigma_fixed;
        validate_sigma(full);
    }
}

namespace {

std::vector<int> assign_t(const ScenarioConfig& config) {
    std::vector<int> t;
    t.reserve(static_cast<std::size_t>(config.m));
    double cumulative = 0.0;
    for (std::size_t s = 0; s < config.t_pattern.size(); ++s) {
        cumulative += config.t_pattern[s].fraction;
        const auto end = s + 1 == config.t_pattern.size()
                             ? static_cast<std::size_t>(config.m)
                             : static_cast<std::size_t>(std::llround(cumulative * config.m));
        while (t.size() < std::min(end, static_cast<std::size_t>(config.m))) {
            t.push_back(config.t_pattern[s].t);
        }
    }
    return t;
}

void draw_covariates(Eigen::MatrixXd& x, const ScenarioConfig& config, RandomStream& rng) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        x(i, 0) = 1.0;
        for (Eigen::Index j = 1; j < x.cols(); ++j) x(i, j) = rng.normal(config.x_mean, config.x_sd);
    }
}

Eigen::MatrixXd symmetric_root(const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Design generate_scenario(const ScenarioConfig& config) {
    config.validate();
    const Eigen::Index p = config.beta_true.size();
    RandomStream rng(config.seed, kDesignSubstream);

    Design d;
    d.x.resize(config.m, p);
    draw_covariates(d.x, config, rng);

    d.sigma = Eigen::MatrixXd::Zero(p, p);
    if (config.sigma_gen == SigmaGen::fixed) {
        d.sigma.bottomRightCorner(p - 1, p - 1) = config.sigma_fixed;
        d.sigma_root = symmetric_root(d.sigma);
    } else {
        for (Eigen::Index j = 1; j < p; ++j) {
            d.sigma(j, j) = static_cast<double>(rng.poisson(10.0)) / 10.0;
        }
        d.sigma_root = d.sigma.cwiseSqrt();
    }
    d.t = assign_t(config);
    d.xbeta = d.x * config.beta_true;
    return d;
}

TrialData run_trial(const Design& design, const ScenarioConfig& config,
                    std::uint64_t trial_index) {
    RandomStream rng(config.seed, trial_index);
    const Eigen::Index m = design.x.rows();
    const Eigen::Index p = design.x.cols();

    Eigen::MatrixXd redrawn;
    if (config.x_redraw == XRedraw::redrawn_per_trial) {
        redrawn.resize(m, p);
        draw_covariates(redrawn, config, rng);
    }
    const Eigen::MatrixXd& x = config.x_redraw == XRedraw::redrawn_per_trial ? redrawn : design.x;

    TrialData out;
    out.xbeta = x * config.beta_true;
    out.lambda.resize(m);
    out.areas.reserve(static_cast<std::size_t>(m));
    const double sd_v = std::sqrt(config.a_true);
    Eigen::VectorXd noise(p);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double theta = out.xbeta(i) + sd_v * rng.normal();
        out.lambda(i) = theta * theta;
        double z;
        if (config.response_mode == ResponseMode::exact_poisson) {
            z = std::sqrt(static_cast<double>(rng.poisson(out.lambda(i))));
        } else {
            const double e = rng.normal() * 0.5;
            z = config.sampling_error ? theta + e : theta;
        }
        const int t = design.t[static_cast<std::size_t>(i)];
        noise(0) = 0.0;
        for (Eigen::Index j = 1; j < p; ++j) noise(j) = rng.normal();
        Eigen::VectorXd x_hat =
            x.row(i).transpose() + design.sigma_root * noise / std::sqrt(static_cast<double>(t));
        x_hat(0) = 1.0;
        out.areas.push_back(AreaObservation::from_validated(std::to_string(i + 1), z, t,
                                                            std::move(x_hat), design.sigma));
    }
    return out;
}

std::string_view label(StudyPredictor p) {
    switch (p) {
        case StudyPredictor::bp: return "BP";
        case StudyPredictor::direct: return "direct";
        case StudyPredictor::p: return "P";
        case StudyPredictor::p_pr: return "P_PR";
        case StudyPredictor::p_yl: return "P_YL";
        case StudyPredictor::b: return "B";
        case StudyPredictor::b_pr: return "B_PR";
        case StudyPredictor::b_yl: return "B_YL";
        case StudyPredictor::opt: return "opt";
        case StudyPredictor::opt_pr: return "opt_PR";
        case StudyPredictor::opt_yl: return "opt_YL";
    }
    return "?";
}

PredictorKind kind_of(StudyPredictor p) {
    switch (p) {
        case StudyPredictor::bp: return PredictorKind::bayes;
        case StudyPredictor::direct: return PredictorKind::direct;
        case StudyPredictor::p:
        case StudyPredictor::p_pr:
        case StudyPredictor::p_yl: return PredictorKind::proposed;
        case StudyPredictor::b:
        case StudyPredictor::b_pr:
        case StudyPredictor::b_yl: return PredictorKind::b_substitute;
        default: return PredictorKind::optimal;
    }
}

Provenance provenance_of(StudyPredictor p) {
    switch (p) {
        case StudyPredictor::p_pr:
        case StudyPredictor::b_pr:
        case StudyPredictor::opt_pr: return Provenance::estimated_pr;
        case StudyPredictor::p_yl:
        case StudyPredictor::b_yl:
        case StudyPredictor::opt_yl: return Provenance::estimated_yl;
        default: return Provenance::known;
    }
}

bool uses_known_parameters(StudyPredictor p) { return provenance_of(p) == Provenance::known; }

const SimulationSummary& StudyResult::summary(StudyPredictor p, int stratum) const {
    for (const auto& s : summaries) {
        if (s.predictor == p && s.stratum == stratum) return s;
    }
    throw InputError("no summary for predictor " + std::string(label(p)) + " at t=" +
                     std::to_string(stratum));
}

namespace {

constexpr std::size_t kP = kStudyPredictorCount;

std::size_t index_of(StudyPredictor p) { return static_cast<std::size_t>(p); }

// Known-parameter quantities that depend only on X beta and the design.
struct KnownArea {
    ShrinkageProfile prof;
    double w0 = 0.0;
    double xbeta = 0.0;
};

KnownArea known_area(const ScenarioConfig& config, const Design& design, std::size_t i,
                     double xbeta) {
    KnownArea k;
    const double b = measurement_variance(config.beta_true, design.sigma);
    k.prof = profile_from_scalars(config.a_true, b, design.t[i], xbeta);
    k.w0 = pred::optimal_weight(xbeta, k.prof).w0;
    k.xbeta = xbeta;
    return k;
}

// Per-trial accumulators laid out flat so trials can be written concurrently.
struct TrialSlots {
    std::size_t strata = 0;
    std::size_t detail = 0;
    std::vector<double> strat_err, strat_sq;     // [trial][predictor][stratum]
    std::vector<double> det_err, det_sq, det_w;  // [trial][detail area][predictor]
    std::vector<std::int64_t> negatives;         // [trial][predictor]
    std::vector<unsigned char> pr_fallback, yl_fallback;

    TrialSlots(std::size_t trials, std::size_t strata_, std::size_t detail_)
        : strata(strata_), detail(detail_),
          strat_err(trials * kP * strata_), strat_sq(trials * kP * strata_),
          det_err(trials * detail_ * kP), det_sq(trials * detail_ * kP), det_w(trials * detail_ * kP),
          negatives(trials * kP), pr_fallback(trials), yl_fallback(trials) {}
};

// Batch-means standard error of the grand mean: 100 batches of trials/100.
double batch_standard_error(const std::vector<double>& per_trial) {
    const std::size_t n = per_trial.size();
    const std::size_t batches = std::min<std::size_t>(100, n);
    if (batches < 2) return 0.0;
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t lo = b * n / batches;
        const std::size_t hi = (b + 1) * n / batches;
        double s = 0.0;
        for (std::size_t k = lo; k < hi; ++k) s += per_trial[k];
        means[b] = s / static_cast<double>(hi - lo);
    }
    double mean = 0.0;
    for (double v : means) mean += v;
    mean /= static_cast<double>(batches);
    double ss = 0.0;
    for (double v : means) ss += square(v - mean);
    return std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

StudyResult run_study(const ScenarioConfig& config, unsigned threads) {
    config.validate();
    StudyResult result;
    result.design = generate_scenario(config);
    const Design& design = result.design;
    const auto m = static_cast<std::size_t>(config.m);
    if (config.m <= config.beta_true.size()) {
        throw InputError("the study estimates (a, beta) per trial and needs m > p");
    }

    result.strata.clear();
    for (int t : design.t) {
        if (std::find(result.strata.begin(), result.strata.end(), t) == result.strata.end()) {
            result.strata.push_back(t);
        }
    }
    std::sort(result.strata.begin(), result.strata.end());
    const std::size_t n_strata = result.strata.size();
    std::vector<std::size_t> stratum_of(m);
    std::vector<int> stratum_size(n_strata, 0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto it = std::find(result.strata.begin(), result.strata.end(), design.t[i]);
        stratum_of[i] = static_cast<std::size_t>(it - result.strata.begin());
        ++stratum_size[stratum_of[i]];
    }
    std::vector<std::size_t> detail_areas{0};
    if (m > 1) detail_areas.push_back(m - 1);

    const bool fixed_design = config.x_redraw == XRedraw::fixed_across_trials;
    std::vector<KnownArea> fixed_known;
    if (fixed_design) {
        for (std::size_t i = 0; i < m; ++i) {
            fixed_known.push_back(known_area(config, design, i, design.xbeta(static_cast<Eigen::Index>(i))));
        }
    }

    const auto n_trials = static_cast<std::size_t>(config.trials);
    TrialSlots slots(n_trials, n_strata, detail_areas.size());

    auto process = [&](std::size_t k) {
        const TrialData data = run_trial(design, config, k);
        const auto pr = estimation::estimate_pr(data.areas);
        const auto yl = estimation::estimate_yl(data.areas, config.yl_variance_term);
        slots.pr_fallback[k] = pr.used_pseudo_inverse;
        slots.yl_fallback[k] = yl.used_pseudo_inverse;

        double* s_err = &slots.strat_err[k * kP * n_strata];
        double* s_sq = &slots.strat_sq[k * kP * n_strata];
        std::int64_t* neg = &slots.negatives[k * kP];
        std::array<double, kP> value{};
        std::array<double, kP> weight{};

        for (std::size_t i = 0; i < m; ++i) {
            const auto& obs = data.areas[i];
            const double z = obs.z();
            const KnownArea known = fixed_design
                                        ? fixed_known[i]
                                        : known_area(config, design, i, data.xbeta(static_cast<Eigen::Index>(i)));
            const double xhat_beta = obs.x_hat().dot(config.beta_true);

            auto put = [&](StudyPredictor p, const PredictorReport& r) {
                value[index_of(p)] = r.value;
                weight[index_of(p)] = r.weight;
            };
            put(StudyPredictor::bp, pred::bayes_report(z, known.xbeta, known.prof));
            put(StudyPredictor::direct, pred::direct_report(z, known.prof));
            put(StudyPredictor::p, pred::proposed_predict(z, xhat_beta, known.prof));
            put(StudyPredictor::b, pred::b_substitute_predict(z, xhat_beta, known.prof));
            put(StudyPredictor::opt, pred::predict_with_weight(known.w0, z, xhat_beta, known.prof));

            auto empirical = [&](const estimation::Estimate& est, StudyPredictor p_kind,
                                 StudyPredictor b_kind, StudyPredictor opt_kind) {
                const double xb = obs.x_hat().dot(est.params.beta);
                const auto prof = derive_profile(est.params, obs, xb);
                put(p_kind, pred::proposed_predict(z, xb, prof));
                put(b_kind, pred::b_substitute_predict(z, xb, prof));
                put(opt_kind, pred::optimal_predict(z, xb, xb, prof));
            };
            empirical(pr, StudyPredictor::p_pr, StudyPredictor::b_pr, StudyPredictor::opt_pr);
            empirical(yl, StudyPredictor::p_yl, StudyPredictor::b_yl, StudyPredictor::opt_yl);

            const double lambda = data.lambda(static_cast<Eigen::Index>(i));
            const std::size_t s = stratum_of[i];
            for (std::size_t q = 0; q < kP; ++q) {
                const double err = value[q] - lambda;
                s_err[q * n_strata + s] += err;
                s_sq[q * n_strata + s] += err * err;
                if (value[q] < 0.0) ++neg[q];
            }
            for (std::size_t d = 0; d < detail_areas.size(); ++d) {
                if (detail_areas[d] != i) continue;
                const std::size_t base = (k * detail_areas.size() + d) * kP;
                for (std::size_t q = 0; q < kP; ++q) {
                    const double err = value[q] - lambda;
                    slots.det_err[base + q] = err;
                    slots.det_sq[base + q] = err * err;
                    slots.det_w[base + q] = weight[q];
                }
            }
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_trials)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= n_trials) return;
            try {
                process(k);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n_trials);
                return;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    // Sequential reduction in trial order keeps results independent of scheduling.
    std::vector<double> per_trial_err(n_trials), per_trial_sq(n_trials);
    for (StudyPredictor p : kStudyPredictors) {
        const std::size_t q = index_of(p);
        for (std::size_t s = 0; s < n_strata; ++s) {
            const double n_s = stratum_size[s];
            for (std::size_t k = 0; k < n_trials; ++k) {
                per_trial_err[k] = slots.strat_err[(k * kP + q) * n_strata + s] / n_s;
                per_trial_sq[k] = slots.strat_sq[(k * kP + q) * n_strata + s] / n_s;
            }
            SimulationSummary sum;
            sum.predictor = p;
            sum.stratum = result.strata[s];
            sum.areas = stratum_size[s];
            sum.trials = config.trials;
            sum.empirical_bias = mean_of(per_trial_err);
            sum.empirical_mspe = mean_of(per_trial_sq);
            sum.bias_standard_error = batch_standard_error(per_trial_err);
            sum.mc_standard_error = batch_standard_error(per_trial_sq);
            result.summaries.push_back(sum);
        }
        std::int64_t negatives = 0;
        for (std::size_t k = 0; k < n_trials; ++k) negatives += slots.negatives[k * kP + q];
        result.negative_counts[q] = negatives;
    }
    for (std::size_t k = 0; k < n_trials; ++k) {
        result.pr_fallback_trials += slots.pr_fallback[k];
        result.yl_fallback_trials += slots.yl_fallback[k];
    }

    auto theory = [&](StudyPredictor p, const KnownArea& k) -> std::pair<double, double> {
        switch (p) {
            case StudyPredictor::bp: return {0.0, pred::bayes_mspe(k.xbeta, config.a_true)};
            case StudyPredictor::direct: return {0.0, pred::mspe_theoretical(1.0, k.xbeta, k.prof)};
            case StudyPredictor::p:
                return {0.0, pred::mspe_theoretical(1.0 - k.prof.gamma, k.xbeta, k.prof)};
            case StudyPredictor::b: {
                const double bias_b = pred::b_substitute_bias(k.prof);
                return {bias_b,
                        pred::mspe_theoretical(1.0 - k.prof.big_b, k.xbeta, k.prof) + bias_b * bias_b};
            }
            default: return {0.0, pred::mspe_theoretical(k.w0, k.xbeta, k.prof)};
        }
    };

    if (fixed_design) {
        for (auto& sum : result.summaries) {
            if (!uses_known_parameters(sum.predictor)) continue;
            double tb = 0.0, tm = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                if (design.t[i] != sum.stratum) continue;
                const auto [b, mspe] = theory(sum.predictor, fixed_known[i]);
                tb += b;
                tm += mspe;
            }
            sum.theoretical_bias = tb / sum.areas;
            sum.theoretical_mspe = tm / sum.areas;
        }
        for (const auto& k : fixed_known) {
            for (double w : {1.0, 1.0 - k.prof.gamma, k.w0}) {
                if (pred::combined_variance(w, k.prof) == 0.0) continue;
                result.max_negative_probability = std::max(
                    result.max_negative_probability, pred::negative_probability(w, k.xbeta, k.prof));
            }
        }
    }

    for (std::size_t d = 0; d < detail_areas.size(); ++d) {
        const std::size_t i = detail_areas[d];
        for (StudyPredictor p : kStudyPredictors) {
            const std::size_t q = index_of(p);
            std::vector<double> w(n_trials);
            for (std::size_t k = 0; k < n_trials; ++k) {
                const std::size_t base = (k * detail_areas.size() + d) * kP + q;
                per_trial_err[k] = slots.det_err[base];
                per_trial_sq[k] = slots.det_sq[base];
                w[k] = slots.det_w[base];
            }
            AreaDetail det;
            det.area_index = static_cast<int>(i);
            det.t = design.t[i];
            det.xbeta = design.xbeta(static_cast<Eigen::Index>(i));
            det.predictor = p;
            det.empirical_bias = mean_of(per_trial_err);
            det.empirical_mspe = mean_of(per_trial_sq);
            det.mc_standard_error = batch_standard_error(per_trial_sq);
            det.mean_weight = mean_of(w);
            if (fixed_design && uses_known_parameters(p)) {
                const auto [b, mspe] = theory(p, fixed_known[i]);
                det.theoretical_bias = b;
                det.theoretical_mspe = mspe;
            }
            result.detail.push_back(det);
        }
    }
    return result;
}

}  // namespace sqrtsae::simulation
