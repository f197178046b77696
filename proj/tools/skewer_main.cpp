#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "skewer/commands.hpp"
#include "skewer/errors.hpp"
#include "skewer/kernels.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"skewer: contextual-bandit toolkit for bite-acquisition strategy selection"};
    app.require_subcommand(1);

    skewer::ImputeArgs impute;
    auto* impute_cmd = app.add_subcommand(
        "impute", "Build a doubly-robust imputed pool from a logged dataset");
    impute_cmd->add_option("--dataset", impute.dataset_path, "Logged dataset (JSON lines)")
        ->required();
    impute_cmd
        ->add_option("--holdout-classes", impute.holdout_classes,
                     "Classes to impute (comma separated)")
        ->required()
        ->delimiter(',');
    impute_cmd->add_option("--out", impute.out_path, "Output pool path")->required();
    impute_cmd->add_option("--actions", impute.actions, "Action count (default 6)");

    skewer::SimulateArgs simulate;
    auto* simulate_cmd =
        app.add_subcommand("simulate", "Run the interaction protocol on a configured scenario");
    simulate_cmd->add_option("--config", simulate.config_path, "Scenario config (JSON)")
        ->required();
    simulate_cmd->add_option("--trace-out", simulate.trace_out, "Trace CSV output")->required();
    simulate_cmd->add_option("--checkpoint-out", simulate.checkpoint_out, "Checkpoint output")
        ->required();

    skewer::TuneArgs tune;
    auto* tune_cmd = app.add_subcommand("tune", "Sweep hyper-parameters over seeded runs");
    tune_cmd->add_option("--config", tune.config_path, "Scenario config (JSON)")->required();
    tune_cmd->add_option("--grid", tune.grid_spec, "Grid, e.g. \"epsilon=0,0.05,0.1;lambda=1,100\"")
        ->required();
    tune_cmd->add_option("--seeds", tune.seeds, "Seeds per cell")->required();
    tune_cmd->add_option("--out", tune.out_path, "Sweep report CSV output")->required();
    tune_cmd->add_option("--jobs", tune.jobs, "Concurrent cells (default: hardware)");

    skewer::InteractArgs interact;
    auto* interact_cmd =
        app.add_subcommand("interact", "Human-in-the-loop session against a checkpoint");
    interact_cmd->add_option("--checkpoint", interact.checkpoint_path, "Checkpoint to update")
        ->required();
    interact_cmd->add_option("--algorithm", interact.algorithm,
                             "greedy | epsilon_greedy | linucb (default: checkpoint's)");
    interact_cmd->add_option("--features-from", interact.features_path,
                             "Feature lines file (default: stdin)");
    interact_cmd->add_option("--seed", interact.seed, "Exploration stream seed");
    interact_cmd
        ->add_option("--action-names", interact.action_names,
                     "Display names, comma separated")
        ->delimiter(',');

    std::string simd_lane;
    app.add_option("--simd", simd_lane, "Kernel lane: auto | scalar | avx2 | neon");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (!simd_lane.empty() && simd_lane != "auto") {
            if (simd_lane == "scalar") skewer::kernels::set_lane(skewer::kernels::Lane::scalar);
            else if (simd_lane == "avx2") skewer::kernels::set_lane(skewer::kernels::Lane::avx2);
            else if (simd_lane == "neon") skewer::kernels::set_lane(skewer::kernels::Lane::neon);
            else throw skewer::ValidationError("unknown --simd lane '" + simd_lane + "'");
        }
        if (impute_cmd->parsed()) skewer::run_impute(impute, std::cout);
        if (simulate_cmd->parsed()) skewer::run_simulate(simulate, std::cout);
        if (tune_cmd->parsed()) skewer::run_tune(tune, std::cout, std::cerr);
        if (interact_cmd->parsed()) skewer::run_interact(interact, std::cin, std::cout);
    } catch (const skewer::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
