#pragma once

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "skewer/metrics.hpp"

namespace skewer {

// Command implementations behind the CLI, stream-injected so sessions are
// scriptable from tests. Each throws ValidationError for bad input and
// IoError/RuntimeFailure for runtime problems; the CLI maps those to exit
// codes 1 and 2.

struct ImputeArgs {
    std::string dataset_path;
    std::vector<std::string> holdout_classes;
    std::string out_path;
    int actions = 6;
};
void run_impute(const ImputeArgs& args, std::ostream& out);

struct SimulateArgs {
    std::string config_path;
    std::string trace_out;
    std::string checkpoint_out;
};
void run_simulate(const SimulateArgs& args, std::ostream& out);

struct TuneArgs {
    std::string config_path;
    std::string grid_spec;  // e.g. "epsilon=0,0.02,0.05,0.1;lambda=1,100"
    int seeds = 1;
    std::string out_path;
    int jobs = 0;  // <= 0 picks hardware concurrency
};
void run_tune(const TuneArgs& args, std::ostream& out, std::ostream& err);

struct InteractArgs {
    std::string checkpoint_path;
    std::string algorithm;     // empty = the checkpoint's recorded algorithm
    std::string features_path; // empty = feature lines come from `in`
    std::uint64_t seed = 0;
    std::vector<std::string> action_names;  // empty = defaults for k
};
void run_interact(const InteractArgs& args, std::istream& in, std::ostream& out);

// "name=v1,v2;name2=v3" -> sweep grid. Valid names: lambda, d, epsilon,
// alpha.
SweepGrid parse_grid_spec(const std::string& spec);

}  // namespace skewer
