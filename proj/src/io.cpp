#include "sqrtsae/io.hpp"

#include "sqrtsae/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace sqrtsae::io {

using nlohmann::json;

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string located(std::string_view source, std::size_t line, const std::string& msg) {
    return std::string(source) + ":" + std::to_string(line) + ": " + msg;
}

}  // namespace

double parse_double(std::string_view text, std::string_view what) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw InputError(std::string(what) + ": '" + std::string(text) + "' is not a number");
    }
    if (!std::isfinite(v)) throw InputError(std::string(what) + " must be finite");
    return v;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
    text = trim(text);
    std::int64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw InputError(std::string(what) + ": '" + std::string(text) + "' is not an integer");
    }
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<AreaObservation> read_area_csv(std::istream& in, std::string_view source) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            for (auto f : split(line)) header.emplace_back(f);
            break;
        }
    }
    if (header.empty()) throw InputError(std::string(source) + ": missing header");
    const std::vector<std::string> fixed{"area_id", "y", "z", "t"};
    if (header.size() < fixed.size() ||
        !std::equal(fixed.begin(), fixed.end(), header.begin())) {
        throw InputError(located(source, line_no, "header must start with area_id,y,z,t"));
    }
    std::size_t k = 0;
    while (fixed.size() + k < header.size() &&
           header[fixed.size() + k] == "xhat_" + std::to_string(k + 1)) {
        ++k;
    }
    if (header.size() != fixed.size() + k + k * k) {
        throw InputError(located(source, line_no,
                                 "expected " + std::to_string(k * k) +
                                     " sigma columns after " + std::to_string(k) +
                                     " xhat columns, header has " +
                                     std::to_string(header.size()) + " fields"));
    }
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            const std::string want = "sigma_" + std::to_string(r + 1) + "_" + std::to_string(c + 1);
            const auto& got = header[fixed.size() + k + r * k + c];
            if (got != want) {
                throw InputError(located(source, line_no,
                                         "expected column '" + want + "', found '" + got + "'"));
            }
        }
    }

    std::vector<AreaObservation> areas;
    std::set<std::string> seen;
    const auto p = static_cast<Eigen::Index>(k + 1);
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        try {
            if (fields.size() != header.size()) {
                throw InputError("expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
            }
            std::string id(fields[0]);
            if (id.empty()) throw InputError("empty area_id");
            if (id.find('"') != std::string::npos) throw InputError("quoted fields are not supported");
            if (!seen.insert(id).second) throw InputError("duplicate area_id '" + id + "'");
            const bool has_y = !fields[1].empty();
            const bool has_z = !fields[2].empty();
            if (has_y == has_z) throw InputError("exactly one of y or z must be given");
            std::optional<std::int64_t> y;
            std::optional<double> z;
            if (has_y) y = parse_int(fields[1], "y");
            else z = parse_double(fields[2], "z");
            const auto t = parse_int(fields[3], "t");
            if (t < 1 || t > std::numeric_limits<int>::max()) throw InputError("t must be >= 1");

            Eigen::VectorXd x_hat(p);
            x_hat(0) = 1.0;
            for (std::size_t j = 0; j < k; ++j) {
                x_hat(static_cast<Eigen::Index>(j + 1)) = parse_double(fields[4 + j], header[4 + j]);
            }
            Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(p, p);
            for (std::size_t r = 0; r < k; ++r) {
                for (std::size_t c = 0; c < k; ++c) {
                    const std::size_t col = 4 + k + r * k + c;
                    sigma(static_cast<Eigen::Index>(r + 1), static_cast<Eigen::Index>(c + 1)) =
                        parse_double(fields[col], header[col]);
                }
            }
            areas.push_back(AreaObservation::make(std::move(id), y, z, static_cast<int>(t),
                                                  std::move(x_hat), std::move(sigma)));
        } catch (const InputError& e) {
            throw InputError(located(source, line_no, e.what()));
        }
    }
    if (areas.empty()) throw InputError(std::string(source) + ": no data rows");
    return areas;
}

std::vector<AreaObservation> read_area_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read '" + path + "'");
    return read_area_csv(in, path);
}

void write_area_csv(std::ostream& out, const std::vector<AreaObservation>& areas) {
    if (areas.empty()) throw InputError("no areas to write");
    const Eigen::Index k = areas.front().dim() - 1;
    out << "area_id,y,z,t";
    for (Eigen::Index j = 1; j <= k; ++j) out << ",xhat_" << j;
    for (Eigen::Index r = 1; r <= k; ++r) {
        for (Eigen::Index c = 1; c <= k; ++c) out << ",sigma_" << r << "_" << c;
    }
    out << "\n";
    for (const auto& a : areas) {
        out << a.area_id() << ",";
        if (a.y()) out << *a.y() << ",";
        else out << "," << format_double(a.z());
        out << "," << a.t();
        for (Eigen::Index j = 1; j <= k; ++j) out << "," << format_double(a.x_hat()(j));
        for (Eigen::Index r = 1; r <= k; ++r) {
            for (Eigen::Index c = 1; c <= k; ++c) out << "," << format_double(a.sigma()(r, c));
        }
        out << "\n";
    }
}

namespace {

constexpr std::string_view kReportHeader =
    "area_id,kind,weight,correction,value,value_truncated,theoretical_bias,theoretical_mspe,"
    "xbeta_is_surrogate";

std::string optional_field(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

}  // namespace

void write_report_csv(std::ostream& out, const std::vector<PredictorReport>& reports) {
    out << kReportHeader << "\n";
    for (const auto& r : reports) {
        out << r.area_id << "," << to_string(r.kind) << "," << format_double(r.weight) << ","
            << format_double(r.correction) << "," << format_double(r.value) << ","
            << format_double(r.value_truncated) << "," << optional_field(r.theoretical_bias) << ","
            << optional_field(r.theoretical_mspe) << "," << (r.xbeta_is_surrogate ? 1 : 0) << "\n";
    }
}

std::vector<PredictorReport> read_report_csv(std::istream& in, std::string_view source) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line) || trim(line) != kReportHeader) {
        throw InputError(located(source, 1, "not a prediction report (header mismatch)"));
    }
    ++line_no;
    std::vector<PredictorReport> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split(line);
        try {
            if (f.size() != 9) throw InputError("expected 9 fields");
            PredictorReport r;
            r.area_id = std::string(f[0]);
            r.kind = parse_predictor_kind(f[1]);
            r.weight = parse_double(f[2], "weight");
            r.correction = parse_double(f[3], "correction");
            r.value = parse_double(f[4], "value");
            r.value_truncated = parse_double(f[5], "value_truncated");
            if (!f[6].empty()) r.theoretical_bias = parse_double(f[6], "theoretical_bias");
            if (!f[7].empty()) r.theoretical_mspe = parse_double(f[7], "theoretical_mspe");
            r.xbeta_is_surrogate = parse_int(f[8], "xbeta_is_surrogate") != 0;
            out.push_back(std::move(r));
        } catch (const InputError& e) {
            throw InputError(located(source, line_no, e.what()));
        }
    }
    return out;
}

namespace {

json parse_json(std::string_view text, std::string_view what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string(what) + ": " + e.what());
    }
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, std::string_view what) {
    if (!j.is_object()) throw InputError(std::string(what) + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) {
            throw InputError(std::string(what) + ": unknown key '" + key + "'");
        }
    }
}

Eigen::VectorXd vector_from(const json& j, std::string_view what) {
    if (!j.is_array()) throw InputError(std::string(what) + " must be an array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw InputError(std::string(what) + " must contain numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

Eigen::MatrixXd matrix_from(const json& j, std::string_view what) {
    if (!j.is_array()) throw InputError(std::string(what) + " must be an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXd m(rows, rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto row = vector_from(j[static_cast<std::size_t>(r)], what);
        if (row.size() != rows) throw InputError(std::string(what) + " must be square");
        m.row(r) = row.transpose();
    }
    return m;
}

template <typename T>
T get_as(const json& j, std::string_view key) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw InputError("config field '" + std::string(key) + "' has the wrong type");
    }
}

}  // namespace

ModelParameters parse_params_json(std::string_view text) {
    const auto j = parse_json(text, "params");
    reject_unknown_keys(j, {"a", "beta"}, "params");
    if (!j.contains("a") || !j.contains("beta")) throw InputError("params needs 'a' and 'beta'");
    if (!j["a"].is_number()) throw InputError("params: 'a' must be a number");
    return ModelParameters::make(j["a"].get<double>(), vector_from(j["beta"], "params.beta"));
}

simulation::ScenarioConfig parse_config_json(std::string_view text) {
    using namespace simulation;
    const auto j = parse_json(text, "config");
    reject_unknown_keys(j,
                        {"m", "trials", "seed", "a_true", "beta_true", "t_pattern", "x_mean",
                         "x_sd", "sigma_gen", "response_mode", "x_redraw", "sampling_error",
                         "yl_variance_term"},
                        "config");
    ScenarioConfig c;
    if (j.contains("m")) c.m = get_as<int>(j["m"], "m");
    if (j.contains("trials")) c.trials = get_as<int>(j["trials"], "trials");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw InputError("config: seed must be a nonnegative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("a_true")) c.a_true = get_as<double>(j["a_true"], "a_true");
    if (j.contains("beta_true")) c.beta_true = vector_from(j["beta_true"], "beta_true");
    if (j.contains("x_mean")) c.x_mean = get_as<double>(j["x_mean"], "x_mean");
    if (j.contains("x_sd")) c.x_sd = get_as<double>(j["x_sd"], "x_sd");
    if (j.contains("sampling_error")) c.sampling_error = get_as<bool>(j["sampling_error"], "sampling_error");
    if (j.contains("t_pattern")) {
        const auto& tp = j["t_pattern"];
        if (!tp.is_array()) throw InputError("config: t_pattern must be an array");
        c.t_pattern.clear();
        for (const auto& e : tp) {
            TStratum s;
            if (e.is_array() && e.size() == 2) {
                s.t = get_as<int>(e[0], "t_pattern.t");
                s.fraction = get_as<double>(e[1], "t_pattern.fraction");
            } else if (e.is_object()) {
                reject_unknown_keys(e, {"t", "fraction"}, "t_pattern entry");
                if (!e.contains("t") || !e.contains("fraction")) {
                    throw InputError("t_pattern entries need 't' and 'fraction'");
                }
                s.t = get_as<int>(e["t"], "t_pattern.t");
                s.fraction = get_as<double>(e["fraction"], "t_pattern.fraction");
            } else {
                throw InputError("t_pattern entries must be [t, fraction] or {t, fraction}");
            }
            c.t_pattern.push_back(s);
        }
    }
    if (j.contains("sigma_gen")) {
        const auto& sg = j["sigma_gen"];
        if (sg.is_string() && sg.get<std::string>() == "poisson10_over_10_diagonal") {
            c.sigma_gen = SigmaGen::poisson10_over_10_diagonal;
        } else if (sg.is_object()) {
            reject_unknown_keys(sg, {"fixed"}, "sigma_gen");
            if (!sg.contains("fixed")) throw InputError("sigma_gen object needs 'fixed'");
            c.sigma_gen = SigmaGen::fixed;
            c.sigma_fixed = matrix_from(sg["fixed"], "sigma_gen.fixed");
        } else {
            throw InputError("sigma_gen must be \"poisson10_over_10_diagonal\" or {\"fixed\": [[...]]}");
        }
    }
    if (j.contains("response_mode")) {
        const auto v = get_as<std::string>(j["response_mode"], "response_mode");
        if (v == "normal_approx") c.response_mode = ResponseMode::normal_approx;
        else if (v == "exact_poisson") c.response_mode = ResponseMode::exact_poisson;
        else throw InputError("response_mode must be normal_approx or exact_poisson");
    }
    if (j.contains("x_redraw")) {
        const auto v = get_as<std::string>(j["x_redraw"], "x_redraw");
        if (v == "fixed_across_trials") c.x_redraw = XRedraw::fixed_across_trials;
        else if (v == "redrawn_per_trial") c.x_redraw = XRedraw::redrawn_per_trial;
        else throw InputError("x_redraw must be fixed_across_trials or redrawn_per_trial");
    }
    if (j.contains("yl_variance_term")) {
        const auto v = get_as<std::string>(j["yl_variance_term"], "yl_variance_term");
        if (v == "published") c.yl_variance_term = estimation::YlVarianceTerm::published;
        else if (v == "per_replicate") c.yl_variance_term = estimation::YlVarianceTerm::per_replicate;
        else throw InputError("yl_variance_term must be published or per_replicate");
    }
    c.validate();
    return c;
}

simulation::ScenarioConfig load_config(const std::string& path) {
    return parse_config_json(read_file(path));
}

std::string config_to_json(const simulation::ScenarioConfig& c) {
    using namespace simulation;
    json j;
    j["m"] = c.m;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["a_true"] = c.a_true;
    j["beta_true"] = std::vector<double>(c.beta_true.data(), c.beta_true.data() + c.beta_true.size());
    j["t_pattern"] = json::array();
    for (const auto& s : c.t_pattern) j["t_pattern"].push_back({{"t", s.t}, {"fraction", s.fraction}});
    j["x_mean"] = c.x_mean;
    j["x_sd"] = c.x_sd;
    if (c.sigma_gen == SigmaGen::fixed) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < c.sigma_fixed.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index col = 0; col < c.sigma_fixed.cols(); ++col) row.push_back(c.sigma_fixed(r, col));
            rows.push_back(row);
        }
        j["sigma_gen"] = {{"fixed", rows}};
    } else {
        j["sigma_gen"] = std::string(to_string(c.sigma_gen));
    }
    j["response_mode"] = std::string(to_string(c.response_mode));
    j["x_redraw"] = std::string(to_string(c.x_redraw));
    j["sampling_error"] = c.sampling_error;
    j["yl_variance_term"] =
        c.yl_variance_term == estimation::YlVarianceTerm::published ? "published" : "per_replicate";
    return j.dump(2);
}

}  // namespace sqrtsae::io
