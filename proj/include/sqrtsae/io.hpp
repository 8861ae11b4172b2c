#pragma once

#include "sqrtsae/estimation.hpp"
#include "sqrtsae/model.hpp"
#include "sqrtsae/simulation.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sqrtsae::io {

// Shortest decimal string that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);

// Area data: header `area_id,y,z,t,xhat_1..xhat_k,sigma_1_1..sigma_k_k` (sigma row-major
// over the k non-intercept covariates). Exactly one of y, z per row. The intercept is
// prepended to x_hat and sigma gets a zero intercept row/column. Errors carry
// `source:line:` prefixes.
std::vector<AreaObservation> read_area_csv(std::istream& in, std::string_view source = "<input>");
std::vector<AreaObservation> read_area_csv_file(const std::string& path);
void write_area_csv(std::ostream& out, const std::vector<AreaObservation>& areas);

// Prediction output, one row per report.
void write_report_csv(std::ostream& out, const std::vector<PredictorReport>& reports);
std::vector<PredictorReport> read_report_csv(std::istream& in, std::string_view source = "<input>");

// {"a": <real>, "beta": [<real>, ...]}; unknown keys are rejected.
ModelParameters parse_params_json(std::string_view text);

// ScenarioConfig as JSON with the struct's field names. Missing fields keep their
// defaults; unknown keys are rejected.
simulation::ScenarioConfig parse_config_json(std::string_view text);
simulation::ScenarioConfig load_config(const std::string& path);
std::string config_to_json(const simulation::ScenarioConfig& config);

std::string read_file(const std::string& path);

}  // namespace sqrtsae::io
