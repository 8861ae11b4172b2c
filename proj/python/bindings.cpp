#include "sqrtsae/errors.hpp"
#include "sqrtsae/estimation.hpp"
#include "sqrtsae/io.hpp"
#include "sqrtsae/numerics.hpp"
#include "sqrtsae/predictors.hpp"
#include "sqrtsae/simulation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace sqrtsae;
namespace pred = sqrtsae::predictors;

namespace {

py::dict report_dict(const PredictorReport& r) {
    py::dict d;
    d["area_id"] = r.area_id;
    d["kind"] = std::string(to_string(r.kind));
    d["weight"] = r.weight;
    d["correction"] = r.correction;
    d["value"] = r.value;
    d["value_truncated"] = r.value_truncated;
    d["theoretical_bias"] = r.theoretical_bias;
    d["theoretical_mspe"] = r.theoretical_mspe;
    d["xbeta_is_surrogate"] = r.xbeta_is_surrogate;
    return d;
}

py::dict estimate_dict(const estimation::Estimate& e) {
    py::dict d;
    d["a"] = e.params.a;
    d["beta"] = e.params.beta;
    d["a_untruncated"] = e.a_untruncated;
    d["used_pseudo_inverse"] = e.used_pseudo_inverse;
    d["provenance"] = std::string(to_string(e.params.provenance));
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Squared-shrinkage predictors for Poisson small-area means";
    m.attr("__version__") = SQRTSAE_VERSION;

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<ShrinkageProfile>(m, "ShrinkageProfile")
        .def_readonly("a", &ShrinkageProfile::a)
        .def_readonly("b", &ShrinkageProfile::b)
        .def_readonly("b_over_t", &ShrinkageProfile::b_over_t)
        .def_readonly("big_b", &ShrinkageProfile::big_b)
        .def_readonly("gamma", &ShrinkageProfile::gamma)
        .def_readonly("gamma_a", &ShrinkageProfile::gamma_a)
        .def_readonly("gamma_b", &ShrinkageProfile::gamma_b)
        .def_readonly("gamma_x", &ShrinkageProfile::gamma_x)
        .def("__repr__", [](const ShrinkageProfile& p) {
            return "ShrinkageProfile(a=" + io::format_double(p.a) + ", b_over_t=" + io::format_double(p.b_over_t) +
                   ", gamma=" + io::format_double(p.gamma) + ")";
        });

    m.def("profile", &profile_from_scalars, py::arg("a"), py::arg("b"), py::arg("t"),
          py::arg("xbeta") = std::nullopt, "Shrinkage quantities from a, b = beta' Sigma beta and t.");

    m.def("bias", &pred::bias, py::arg("w"), py::arg("profile"));
    m.def("correction_constant", &pred::correction_constant, py::arg("w"), py::arg("profile"));
    m.def("g1", &pred::g1, py::arg("w"), py::arg("profile"));
    m.def("g2", &pred::g2, py::arg("w"), py::arg("profile"));
    m.def("mspe_theoretical", &pred::mspe_theoretical, py::arg("w"), py::arg("xbeta"), py::arg("profile"));
    m.def(
        "mspe_oracle_terms",
        [](double w, double xbeta, const ShrinkageProfile& p) {
            const auto t = pred::mspe_oracle_terms(w, xbeta, p);
            py::dict d;
            d["fourth_moment"] = t.fourth_moment;
            d["correction_sq"] = t.correction_sq;
            d["lambda_sq"] = t.lambda_sq;
            d["correction_cross_s"] = t.correction_cross_s;
            d["correction_cross_lambda"] = t.correction_cross_lambda;
            d["lambda_cross_s"] = t.lambda_cross_s;
            d["sum"] = t.sum();
            return d;
        },
        py::arg("w"), py::arg("xbeta"), py::arg("profile"));
    m.def("bayes_predict", &pred::bayes_predict, py::arg("z"), py::arg("xbeta_true"), py::arg("a"));
    m.def("bayes_mspe", &pred::bayes_mspe, py::arg("xbeta_true"), py::arg("a"));
    m.def("direct_predict", &pred::direct_predict, py::arg("z"));
    m.def("b_substitute_bias", &pred::b_substitute_bias, py::arg("profile"));
    m.def(
        "optimal_weight",
        [](double xbeta, const ShrinkageProfile& p) {
            const auto o = pred::optimal_weight(xbeta, p);
            return py::make_tuple(o.w0, o.mspe, o.interior);
        },
        py::arg("xbeta"), py::arg("profile"), "(w0, mspe at w0, whether w0 is an interior root)");
    m.def("weight_gap_bound", &pred::weight_gap_bound, py::arg("xbeta"), py::arg("profile"));
    m.def("negative_probability", &pred::negative_probability, py::arg("w"), py::arg("xbeta"), py::arg("profile"));
    m.def("mle_xbeta", &pred::mle_xbeta, py::arg("z"), py::arg("xhat_beta"), py::arg("profile"));

    m.def(
        "solve_cubic_real",
        [](double c3, double c2, double c1, double c0) {
            return numerics::solve_cubic_real({c3, c2, c1, c0});
        },
        py::arg("c3"), py::arg("c2"), py::arg("c1"), py::arg("c0"));
    m.def("normal_cdf", &numerics::normal_cdf, py::arg("x"));

    m.def(
        "estimate",
        [](const std::string& method, const std::string& csv_path) {
            const auto areas = io::read_area_csv_file(csv_path);
            return estimate_dict(estimation::estimate(estimation::parse_method(method), areas));
        },
        py::arg("method"), py::arg("csv_path"), "Estimate (a, beta) from an area CSV by 'pr' or 'yl'.");
    m.def(
        "predict",
        [](const std::string& kind, const std::string& csv_path, double a, const Eigen::VectorXd& beta) {
            const auto areas = io::read_area_csv_file(csv_path);
            const auto reports = estimation::predict_areas(parse_predictor_kind(kind), areas,
                                                           ModelParameters::make(a, beta));
            py::list out;
            for (const auto& r : reports) out.append(report_dict(r));
            return out;
        },
        py::arg("kind"), py::arg("csv_path"), py::arg("a"), py::arg("beta"));

    m.def(
        "run_study",
        [](const std::string& config_json, unsigned threads) {
            const auto config = io::parse_config_json(config_json);
            simulation::StudyResult r;
            {
                py::gil_scoped_release release;
                r = simulation::run_study(config, threads);
            }
            py::list rows;
            for (const auto& s : r.summaries) {
                py::dict d;
                d["predictor"] = std::string(simulation::label(s.predictor));
                d["t"] = s.stratum;
                d["empirical_bias"] = s.empirical_bias;
                d["empirical_mspe"] = s.empirical_mspe;
                d["mc_standard_error"] = s.mc_standard_error;
                d["theoretical_bias"] = s.theoretical_bias;
                d["theoretical_mspe"] = s.theoretical_mspe;
                rows.append(d);
            }
            py::dict negatives;
            for (auto p : simulation::kStudyPredictors) {
                negatives[py::str(std::string(simulation::label(p)))] =
                    r.negative_counts[static_cast<std::size_t>(p)];
            }
            py::dict out;
            out["summaries"] = rows;
            out["negative_counts"] = negatives;
            out["max_negative_probability"] = r.max_negative_probability;
            return out;
        },
        py::arg("config_json") = "{}", py::arg("threads") = 1,
        "Run the Monte Carlo study for a JSON scenario config.");
}
