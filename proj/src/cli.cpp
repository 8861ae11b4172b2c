#include "sqrtsae/cli.hpp"

#include "sqrtsae/errors.hpp"
#include "sqrtsae/estimation.hpp"
#include "sqrtsae/io.hpp"
#include "sqrtsae/predictors.hpp"
#include "sqrtsae/simulation.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace sqrtsae::cli {

namespace fs = std::filesystem;
namespace pred = sqrtsae::predictors;
namespace sim = sqrtsae::simulation;
using io::format_double;
using nlohmann::json;

namespace {

std::string optional_field(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    return out;
}

void write_table2(std::ostream& out, const sim::ScenarioConfig& config,
                  const sim::StudyResult& result) {
    out << "m,t";
    for (auto p : sim::kStudyPredictors) out << "," << sim::label(p);
    out << "\n";
    for (int t : result.strata) {
        out << config.m << "," << t;
        for (auto p : sim::kStudyPredictors) {
            out << "," << format_double(result.summary(p, t).empirical_mspe);
        }
        out << "\n";
    }
}

void write_table1(std::ostream& out, const sim::StudyResult& result) {
    out << "area,t,xbeta,predictor,mean_weight,theoretical_bias,empirical_bias,"
           "theoretical_mspe,empirical_mspe,mc_standard_error\n";
    for (const auto& d : result.detail) {
        out << d.area_index + 1 << "," << d.t << "," << format_double(d.xbeta) << ","
            << sim::label(d.predictor) << "," << format_double(d.mean_weight) << ","
            << optional_field(d.theoretical_bias) << "," << format_double(d.empirical_bias) << ","
            << optional_field(d.theoretical_mspe) << "," << format_double(d.empirical_mspe) << ","
            << format_double(d.mc_standard_error) << "\n";
    }
}

void write_summary_long(std::ostream& out, const sim::StudyResult& result) {
    out << "predictor,t,areas,trials,empirical_bias,bias_standard_error,empirical_mspe,"
           "mc_standard_error,theoretical_bias,theoretical_mspe\n";
    for (const auto& s : result.summaries) {
        out << sim::label(s.predictor) << "," << s.stratum << "," << s.areas << "," << s.trials
            << "," << format_double(s.empirical_bias) << "," << format_double(s.bias_standard_error)
            << "," << format_double(s.empirical_mspe) << "," << format_double(s.mc_standard_error)
            << "," << optional_field(s.theoretical_bias) << "," << optional_field(s.theoretical_mspe)
            << "\n";
    }
}

std::uint64_t seed_override(std::uint64_t fallback) {
    const char* env = std::getenv("SAE_SEED");
    if (env == nullptr || *env == '\0') return fallback;
    const auto v = io::parse_int(env, "SAE_SEED");
    if (v < 0) throw InputError("SAE_SEED must be nonnegative");
    return static_cast<std::uint64_t>(v);
}

}  // namespace

void cmd_simulate(const SimulateOptions& options) {
    auto config = io::load_config(options.config_path);
    config.seed = seed_override(config.seed);
    const auto result = sim::run_study(config, options.threads);

    const fs::path dir(options.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create '" + dir.string() + "': " + ec.message());

    {
        auto out = open_out(dir / "table2_summary.csv");
        write_table2(out, config, result);
    }
    {
        auto out = open_out(dir / "table1_detail.csv");
        write_table1(out, result);
    }
    {
        auto out = open_out(dir / "summary_long.csv");
        write_summary_long(out, result);
    }

    json meta;
    meta["seed"] = config.seed;
    meta["version"] = SQRTSAE_VERSION;
    meta["config"] = json::parse(io::config_to_json(config));
    json negatives = json::object();
    for (auto p : sim::kStudyPredictors) {
        negatives[std::string(sim::label(p))] = result.negative_counts[static_cast<std::size_t>(p)];
    }
    meta["negative_counts"] = negatives;
    meta["pr_fallback_trials"] = result.pr_fallback_trials;
    meta["yl_fallback_trials"] = result.yl_fallback_trials;
    meta["max_negative_probability"] = result.max_negative_probability;
    auto out = open_out(dir / "run_meta.json");
    out << meta.dump(2) << "\n";
}

namespace {

std::vector<PredictorKind> parse_kinds(const std::vector<std::string>& names) {
    std::vector<PredictorKind> kinds;
    for (const auto& raw : names) {
        std::stringstream ss(raw);
        std::string name;
        while (std::getline(ss, name, ',')) {
            if (name.empty()) continue;
            kinds.push_back(parse_predictor_kind(name));
        }
    }
    if (kinds.empty()) throw InputError("no predictor kinds requested");
    return kinds;
}

}  // namespace

void cmd_predict(const PredictOptions& options) {
    const auto areas = io::read_area_csv_file(options.data_path);
    const auto kinds = parse_kinds(options.kinds);

    std::optional<estimation::Estimate> est;
    ModelParameters params;
    std::string method = options.params;
    if (method.rfind("estimate:", 0) == 0) method = method.substr(9);
    if (method == "pr" || method == "yl") {
        est = estimation::estimate(estimation::parse_method(method), areas);
        params = est->params;
    } else if (!options.params.empty() && options.params.front() == '{') {
        params = io::parse_params_json(options.params);
    } else {
        params = io::parse_params_json(io::read_file(options.params));
    }
    if (params.beta.size() != areas.front().dim()) {
        throw InputError("beta has " + std::to_string(params.beta.size()) +
                         " entries but the data have p=" + std::to_string(areas.front().dim()));
    }

    std::vector<std::vector<PredictorReport>> per_kind;
    for (auto k : kinds) per_kind.push_back(estimation::predict_areas(k, areas, params));
    std::vector<PredictorReport> rows;
    for (std::size_t i = 0; i < areas.size(); ++i) {
        for (const auto& reports : per_kind) {
            const auto& r = reports[i];
            if (!std::isfinite(r.value)) {
                throw NumericError("non-finite prediction for area '" + r.area_id + "'");
            }
            rows.push_back(r);
        }
    }
    {
        auto out = open_out(options.out_path);
        io::write_report_csv(out, rows);
    }

    if (est) {
        json meta;
        meta["method"] = std::string(estimation::to_string(estimation::parse_method(method)));
        meta["a"] = est->params.a;
        meta["a_untruncated"] = est->a_untruncated;
        meta["beta"] = std::vector<double>(est->params.beta.data(),
                                           est->params.beta.data() + est->params.beta.size());
        meta["used_pseudo_inverse"] = est->used_pseudo_inverse;
        meta["m"] = areas.size();
        meta["p"] = areas.front().dim();
        auto out = open_out(options.out_path + ".meta.json");
        out << meta.dump(2) << "\n";
    }
}

namespace {

Eigen::MatrixXd sigma_from(const std::vector<double>& flat, Eigen::Index p) {
    const Eigen::Index k = p - 1;
    const auto n = static_cast<Eigen::Index>(flat.size());
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(p, p);
    if (n == k * k) {
        for (Eigen::Index r = 0; r < k; ++r) {
            for (Eigen::Index c = 0; c < k; ++c) sigma(r + 1, c + 1) = flat[static_cast<std::size_t>(r * k + c)];
        }
    } else if (n == p * p) {
        for (Eigen::Index r = 0; r < p; ++r) {
            for (Eigen::Index c = 0; c < p; ++c) sigma(r, c) = flat[static_cast<std::size_t>(r * p + c)];
        }
    } else {
        throw InputError("sigma needs " + std::to_string(k * k) + " or " + std::to_string(p * p) +
                         " entries, got " + std::to_string(n));
    }
    validate_sigma(sigma);
    return sigma;
}

}  // namespace

void cmd_mspe(const MspeOptions& o, std::ostream& out) {
    if (o.beta.empty()) throw InputError("beta must have at least the intercept");
    if (!std::isfinite(o.a) || o.a < 0.0) throw InputError("a must be finite and nonnegative");
    if (!std::isfinite(o.xbeta)) throw InputError("xbeta must be finite");
    if (o.t < 1) throw InputError("t must be >= 1");
    const Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(o.beta.data(),
                                                                   static_cast<Eigen::Index>(o.beta.size()));
    const Eigen::MatrixXd sigma = sigma_from(o.sigma, beta.size());
    const double b = measurement_variance(beta, sigma);
    const auto prof = profile_from_scalars(o.a, b, o.t, o.xbeta);
    const auto opt = pred::optimal_weight(o.xbeta, prof);

    out << "# a=" << format_double(o.a) << " b=" << format_double(b) << " t=" << o.t
        << " xbeta=" << format_double(o.xbeta) << "\n";
    out << "# B=" << format_double(prof.big_b) << " gamma=" << format_double(prof.gamma)
        << " w0=" << format_double(opt.w0) << "\n";
    if (o.xbeta != 0.0) {
        out << "# weight_gap_bound=" << format_double(pred::weight_gap_bound(o.xbeta, prof)) << "\n";
    } else {
        out << "# weight_gap_bound=undefined (xbeta=0)\n";
    }
    out << "name,weight,bias,correction,mspe,g1,g2,negative_probability\n";
    auto row = [&](const std::string& name, double w) {
        if (!(w >= 0.0 && w <= 1.0)) throw InputError("weight " + format_double(w) + " is outside [0,1]");
        const auto parts = pred::mspe_parts(w, o.xbeta, prof);
        out << name << "," << format_double(w) << "," << format_double(pred::bias(w, prof)) << ","
            << format_double(pred::correction_constant(w, prof)) << ","
            << format_double(parts.total()) << "," << format_double(parts.g1) << ","
            << format_double(parts.g2) << ","
            << format_double(pred::negative_probability(w, o.xbeta, prof)) << "\n";
    };
    row("direct", 1.0);
    row("one_minus_B", 1.0 - prof.big_b);
    row("one_minus_gamma", 1.0 - prof.gamma);
    row("optimal", opt.w0);
    for (double w : o.weights) row("custom", w);
}

int run_guarded(const std::function<void()>& body, std::ostream& err) {
    try {
        body();
        return kExitOk;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }
}

}  // namespace sqrtsae::cli
