#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skewer/environment.hpp"
#include "skewer/metrics.hpp"

namespace skewer {

// A run scenario, loaded from a JSON config file. Validation is total:
// every problem (unknown keys included) is collected and reported in one
// error before anything runs.
//
// Schema:
// {
//   "environment": {"kind": "synthetic", "spec": <path or inline object>}
//                | {"kind": "replay", "pool": <path>,
//                   "success_threshold": 0.5},
//   "algorithm": "greedy" | "epsilon_greedy" | "linucb",
//   "hyper": {"d": 3, "k": 6, "lambda": 100.0,
//             "epsilon": 0.1, "alpha": 0.01},          // epsilon/alpha optional
//   "rounds": 60,
//   "seed": 42,
//   "class_schedule": {"cycle": ["a", "b"]}            // optional
//                   | {"segments": [{"class": "a", "rounds": 20}, ...]},
//   "warm_start": "checkpoint.bin",                    // optional
//   "projection": {"d_target": 16, "seed": 7},         // optional
//   "action_names": ["...", ...]                       // optional, k entries
// }
struct ScenarioConfig {
    enum class EnvKind { synthetic, replay };

    EnvKind env_kind = EnvKind::synthetic;
    std::string spec_path;              // synthetic, when given as a path
    std::optional<SyntheticSpec> inline_spec;
    std::string pool_path;              // replay
    double success_threshold = 0.5;

    Strategy::Kind algorithm = Strategy::Kind::greedy;
    HyperParams hyper;
    int rounds = 0;
    std::uint64_t seed = 0;
    ClassSchedule schedule;
    std::optional<std::string> warm_start;
    std::optional<int> projection_d;
    std::optional<std::uint64_t> projection_seed;
    std::vector<std::string> action_names;  // empty = defaults
};

ScenarioConfig parse_scenario_file(const std::string& path);
ScenarioConfig parse_scenario_text(const std::string& text, const std::string& origin);

// Synthetic spec files share the inline-spec schema:
// {"d": 3, "k": 6, "classes": [{"label": "...", "center": [...],
//  "noise_scale": 0.0, "success_rates": [...]}]}
SyntheticSpec parse_synthetic_spec_file(const std::string& path);
SyntheticSpec parse_synthetic_spec_text(const std::string& text, const std::string& origin);

// Everything loaded and cross-checked, ready to run. Projection (when
// configured) is already folded into the environment factory and pool.
struct LoadedScenario {
    ScenarioConfig config;
    Strategy strategy;
    std::optional<SyntheticSpec> synthetic;  // the un-projected ground truth
    PoolPtr pool;                            // replay: projected pool
    std::shared_ptr<const RandomProjection> projection;

    std::unique_ptr<Environment> make_environment(std::uint64_t env_seed) const;
    // Class-level best sets for convergence reporting.
    std::map<std::string, std::vector<int>> best_sets() const;
    std::vector<std::string> action_names() const;
};

LoadedScenario load_scenario(const ScenarioConfig& config);

// Wraps an environment so sampled contexts pass through a fixed projection.
std::unique_ptr<Environment> make_projected_environment(
    std::unique_ptr<Environment> inner, std::shared_ptr<const RandomProjection> projection);

}  // namespace skewer
