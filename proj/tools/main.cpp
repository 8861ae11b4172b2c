#include "sqrtsae/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace sqrtsae::cli;

    CLI::App app{"Squared-shrinkage predictors for Poisson small-area means"};
    app.require_subcommand(1);

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Run the Monte Carlo study");
    simulate->add_option("--config", sim.config_path, "Scenario JSON")->required();
    simulate->add_option("--out", sim.out_dir, "Output directory")->required();
    simulate->add_option("--threads", sim.threads, "Worker threads")->check(CLI::PositiveNumber);

    PredictOptions pred;
    auto* predict = app.add_subcommand("predict", "Predict area means from a data CSV");
    predict->add_option("--data", pred.data_path, "Area CSV")->required();
    predict->add_option("--params", pred.params,
                        "pr, yl, estimate:pr, estimate:yl, JSON text or JSON file")
        ->required();
    predict->add_option("--kinds", pred.kinds, "direct,proposed,b_substitute,optimal")
        ->required()
        ->delimiter(',');
    predict->add_option("--out", pred.out_path, "Output CSV")->required();

    MspeOptions mspe;
    auto* mspe_cmd = app.add_subcommand("mspe", "Bias and MSPE table for one area");
    mspe_cmd->add_option("--a", mspe.a)->required();
    mspe_cmd->add_option("--beta", mspe.beta)->required()->delimiter(',');
    mspe_cmd->add_option("--sigma", mspe.sigma)->required()->delimiter(',');
    mspe_cmd->add_option("--t", mspe.t)->required();
    mspe_cmd->add_option("--xbeta", mspe.xbeta)->required();
    mspe_cmd->add_option("--w", mspe.weights)->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    return run_guarded(
        [&] {
            if (*simulate) cmd_simulate(sim);
            else if (*predict) cmd_predict(pred);
            else cmd_mspe(mspe, std::cout);
        },
        std::cerr);
}
