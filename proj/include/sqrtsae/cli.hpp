#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace sqrtsae::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

struct SimulateOptions {
    std::string config_path;
    std::string out_dir;
    unsigned threads = 1;
};

// Writes table1_detail.csv, table2_summary.csv, summary_long.csv and run_meta.json into
// out_dir. SAE_SEED in the environment overrides the configured seed.
void cmd_simulate(const SimulateOptions& options);

struct PredictOptions {
    std::string data_path;
    // "pr", "yl", "estimate:pr", "estimate:yl", inline JSON or a path to a JSON file
    // holding {"a": ..., "beta": [...]}.
    std::string params;
    std::vector<std::string> kinds;
    std::string out_path;
};

// Writes one row per (area, kind). When parameters are estimated, the estimate goes to
// `<out_path>.meta.json`.
void cmd_predict(const PredictOptions& options);

struct MspeOptions {
    double a = 0.0;
    std::vector<double> beta;  // intercept first
    // Row-major covariance of the non-intercept covariates (k*k entries), or the full
    // p*p matrix with a zero intercept row/column.
    std::vector<double> sigma;
    int t = 1;
    double xbeta = 0.0;
    std::vector<double> weights;
};

// Prints a CSV table of bias, MSPE, g1, g2 and negative probability for the named weights
// 1, 1-B, 1-gamma, w0 and any extra weights.
void cmd_mspe(const MspeOptions& options, std::ostream& out);

// Runs `body`, reports any exception on `err` and maps it to an exit code.
int run_guarded(const std::function<void()>& body, std::ostream& err);

}  // namespace sqrtsae::cli
