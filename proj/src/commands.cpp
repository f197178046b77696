#include "skewer/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "json.hpp"
#include "skewer/checkpoint.hpp"
#include "skewer/csv_io.hpp"
#include "skewer/dataset_io.hpp"
#include "skewer/errors.hpp"
#include "skewer/scenario.hpp"

namespace skewer {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string format_mean_losses(const std::vector<double>& losses) {
    std::vector<std::string> parts;
    parts.reserve(losses.size());
    char buf[32];
    for (double v : losses) {
        std::snprintf(buf, sizeof(buf), "%.4f", v);
        parts.emplace_back(buf);
    }
    return join(parts, ", ");
}

Strategy::Kind parse_algorithm_name(const std::string& name) {
    if (name == "greedy") return Strategy::Kind::greedy;
    if (name == "epsilon_greedy") return Strategy::Kind::epsilon_greedy;
    if (name == "linucb") return Strategy::Kind::linucb;
    throw ValidationError("unknown algorithm '" + name +
                          "' (expected greedy, epsilon_greedy, or linucb)");
}

}  // namespace

void run_impute(const ImputeArgs& args, std::ostream& out) {
    if (args.holdout_classes.empty()) {
        throw ValidationError("at least one holdout class is required");
    }
    if (args.actions < 1) throw ValidationError("--actions must be >= 1");
    const auto dataset = parse_dataset(args.dataset_path);

    std::set<std::string> present;
    for (const auto& ex : dataset) present.insert(ex.class_label);
    std::vector<std::string> missing;
    for (const auto& cls : args.holdout_classes) {
        if (!present.count(cls)) missing.push_back(cls);
    }
    if (!missing.empty()) {
        throw ValidationError("holdout classes not found in dataset: " + join(missing, ", "));
    }

    const std::set<std::string> holdout(args.holdout_classes.begin(),
                                        args.holdout_classes.end());
    std::vector<LoggedExample> filtered;
    for (const auto& ex : dataset) {
        if (holdout.count(ex.class_label)) filtered.push_back(ex);
    }

    // Herding is fitted on each held-out class's own logged data.
    const auto herding = herding_estimate(filtered, args.actions);
    const auto pool = impute_dr_losses(filtered, herding);
    write_pool(pool, args.out_path);

    out << "imputed " << pool.size() << " contexts for " << herding.size() << " classes -> "
        << args.out_path << "\n";
    const auto names = default_action_names(args.actions);
    for (const auto& [label, mean_losses] : herding) {
        const auto best = best_set_from_mean_losses(mean_losses);
        std::vector<std::string> best_names;
        for (int a : best) best_names.push_back(names[a]);
        out << "  " << label << ": mean losses [" << format_mean_losses(mean_losses)
            << "], best set {" << join(best_names, ", ") << "}\n";
    }
}

namespace {

PolicyState starting_policy(const LoadedScenario& scenario) {
    const ScenarioConfig& config = scenario.config;
    if (!config.warm_start) return init_policy(config.hyper);
    const LoadedCheckpoint loaded = load_checkpoint(*config.warm_start);
    if (loaded.policy.hyper.d != config.hyper.d || loaded.policy.hyper.k != config.hyper.k) {
        throw ValidationError("warm-start checkpoint has d=" +
                              std::to_string(loaded.policy.hyper.d) +
                              ", k=" + std::to_string(loaded.policy.hyper.k) +
                              " but the config expects d=" + std::to_string(config.hyper.d) +
                              ", k=" + std::to_string(config.hyper.k));
    }
    return loaded.policy;
}

}  // namespace

void run_simulate(const SimulateArgs& args, std::ostream& out) {
    const LoadedScenario scenario = load_scenario(parse_scenario_file(args.config_path));
    const ScenarioConfig& config = scenario.config;

    PolicyState policy = starting_policy(scenario);
    auto env = scenario.make_environment(derive_seed(config.seed, 0));
    Rng rng(derive_seed(config.seed, 1));
    const Trace trace =
        run_protocol(*env, policy, scenario.strategy, config.rounds, rng, config.schedule);

    write_trace_csv(trace, args.trace_out);
    save_checkpoint(policy, strategy_name(scenario.strategy.kind), args.checkpoint_out);

    const double total_loss = trace.records.back().cumulative_loss;
    out << "algorithm: " << strategy_name(scenario.strategy.kind) << "\n";
    out << "rounds: " << config.rounds << "\n";
    out << "total loss: " << format_double(total_loss) << "\n";

    const auto best_sets = scenario.best_sets();
    const auto point = convergence_point(trace, best_sets);
    if (point) {
        out << "convergence point: round " << *point << "\n";
    } else {
        out << "convergence point: none\n";
    }

    // Per-class action histogram.
    const auto names = scenario.action_names();
    std::map<std::string, std::vector<int>> histogram;
    for (const auto& rec : trace.records) {
        auto& counts = histogram[rec.class_label];
        if (counts.empty()) counts.assign(config.hyper.k, 0);
        counts[rec.action.index] += 1;
    }
    for (const auto& [label, counts] : histogram) {
        out << "  " << label << ":";
        for (int a = 0; a < config.hyper.k; ++a) {
            if (counts[a] > 0) out << " " << names[a] << "=" << counts[a];
        }
        out << "\n";
    }
    out << "trace: " << args.trace_out << "\n";
    out << "checkpoint: " << args.checkpoint_out << "\n";
}

SweepGrid parse_grid_spec(const std::string& spec) {
    SweepGrid grid;
    std::stringstream axes(spec);
    std::string axis;
    while (std::getline(axes, axis, ';')) {
        if (axis.empty()) continue;
        const auto eq = axis.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("grid axis '" + axis + "' is missing '='");
        }
        const std::string name = axis.substr(0, eq);
        if (name != "lambda" && name != "d" && name != "epsilon" && name != "alpha") {
            throw ValidationError("unknown grid parameter '" + name +
                                  "' (expected lambda, d, epsilon, or alpha)");
        }
        for (const auto& [existing, values] : grid) {
            if (existing == name) throw ValidationError("duplicate grid parameter '" + name + "'");
        }
        std::vector<double> values;
        std::stringstream list(axis.substr(eq + 1));
        std::string token;
        while (std::getline(list, token, ',')) {
            try {
                std::size_t used = 0;
                const double v = std::stod(token, &used);
                if (used != token.size()) throw std::invalid_argument(token);
                values.push_back(v);
            } catch (const std::exception&) {
                throw ValidationError("grid value '" + token + "' for '" + name +
                                      "' is not a number");
            }
        }
        if (values.empty()) {
            throw ValidationError("grid parameter '" + name + "' has no values");
        }
        grid.emplace_back(name, std::move(values));
    }
    if (grid.empty()) throw ValidationError("empty grid spec");
    return grid;
}

namespace {

bool grid_has(const SweepGrid& grid, const std::string& name) {
    return std::any_of(grid.begin(), grid.end(),
                       [&](const auto& axis) { return axis.first == name; });
}

// Per-d projections and projected pools, shared across concurrent cells.
class ProjectionCache {
public:
    ProjectionCache(int native_dim, std::uint64_t seed, PoolPtr raw_pool)
        : native_dim_(native_dim), seed_(seed), raw_pool_(std::move(raw_pool)) {}

    std::shared_ptr<const RandomProjection> projection_for(int d) {
        if (d == native_dim_) return nullptr;
        std::lock_guard<std::mutex> lock(mutex_);
        auto& slot = projections_[d];
        if (!slot) slot = std::make_shared<const RandomProjection>(native_dim_, d, seed_);
        return slot;
    }

    PoolPtr pool_for(int d) {
        if (!raw_pool_ || d == native_dim_) return raw_pool_;
        auto projection = projection_for(d);
        std::lock_guard<std::mutex> lock(mutex_);
        auto& slot = pools_[d];
        if (!slot) {
            slot = std::make_shared<const std::vector<ImputedContext>>(
                project_pool(*raw_pool_, *projection));
        }
        return slot;
    }

private:
    int native_dim_;
    std::uint64_t seed_;
    PoolPtr raw_pool_;
    std::mutex mutex_;
    std::map<int, std::shared_ptr<const RandomProjection>> projections_;
    std::map<int, PoolPtr> pools_;
};

}  // namespace

void run_tune(const TuneArgs& args, std::ostream& out, std::ostream& err) {
    if (args.seeds < 1) throw ValidationError("--seeds must be >= 1");
    const SweepGrid grid = parse_grid_spec(args.grid_spec);
    const ScenarioConfig config = parse_scenario_file(args.config_path);
    if (grid_has(grid, "d") && config.projection_d) {
        throw ValidationError("grid parameter d conflicts with the config's projection block");
    }
    const LoadedScenario scenario = load_scenario(config);

    SweepScenario sweep;
    sweep.base_hyper = config.hyper;
    sweep.algorithm = config.algorithm;
    sweep.rounds = config.rounds;
    sweep.base_seed = config.seed;
    sweep.schedule = config.schedule;

    const int native_dim = scenario.synthetic ? scenario.synthetic->d
                                              : static_cast<int>(scenario.pool->front()
                                                                     .context.features.size());
    const std::uint64_t proj_seed = config.projection_seed
                                        ? *config.projection_seed
                                        : derive_seed(config.seed, 0x646A70);
    auto cache = std::make_shared<ProjectionCache>(native_dim, proj_seed, scenario.pool);

    auto cell_dim = [&config](const std::map<std::string, double>& params) {
        const auto it = params.find("d");
        return it == params.end() ? config.hyper.d : static_cast<int>(it->second);
    };
    if (scenario.synthetic) {
        const SyntheticSpec spec = *scenario.synthetic;
        sweep.make_env = [spec, cache, cell_dim](const std::map<std::string, double>& params,
                                                 std::uint64_t env_seed) {
            std::unique_ptr<Environment> env = make_synthetic_environment(spec, env_seed);
            if (auto projection = cache->projection_for(cell_dim(params))) {
                env = make_projected_environment(std::move(env), projection);
            }
            return env;
        };
    } else {
        const double threshold = config.success_threshold;
        sweep.make_env = [cache, cell_dim, threshold](const std::map<std::string, double>& params,
                                                      std::uint64_t env_seed) {
            return make_replay_environment(cache->pool_for(cell_dim(params)), threshold,
                                           env_seed);
        };
        sweep.pool_for_cell = [cache, cell_dim](const std::map<std::string, double>& params) {
            return cache->pool_for(cell_dim(params));
        };
    }

    const SweepReport report = run_sweep(sweep, grid, args.seeds, args.jobs);
    write_sweep_csv(report, args.out_path);

    for (const auto& cell : report.cells) {
        if (cell.error.empty()) continue;
        err << "cell";
        for (const auto& [name, value] : cell.params) {
            err << " " << name << "=" << format_double(value);
        }
        err << " failed: " << cell.error << "\n";
    }

    out << report.cells.size() << " cells x " << args.seeds << " seeds -> " << args.out_path
        << "\n";
    if (const auto best = report.argmin_cell()) {
        const auto& cell = report.cells[*best];
        out << "argmin cell:";
        for (const auto& name : report.param_names) {
            out << " " << name << "=" << format_double(cell.params.at(name));
        }
        out << " (mean loss " << format_double(cell.mean_loss) << ")\n";
    } else {
        out << "argmin cell: none (all cells failed)\n";
    }
}

namespace {

std::optional<std::vector<double>> parse_feature_line(const std::string& line, int expected_dim,
                                                      std::string& error) {
    json parsed;
    try {
        parsed = json::parse(line);
    } catch (const json::parse_error& e) {
        error = std::string("not valid JSON: ") + e.what();
        return std::nullopt;
    }
    if (!parsed.is_array()) {
        error = "expected a JSON array of numbers";
        return std::nullopt;
    }
    std::vector<double> features;
    for (const auto& v : parsed) {
        if (!v.is_number()) {
            error = "expected a JSON array of numbers";
            return std::nullopt;
        }
        features.push_back(v.get<double>());
    }
    if (static_cast<int>(features.size()) != expected_dim) {
        error = "expected " + std::to_string(expected_dim) + " features, got " +
                std::to_string(features.size());
        return std::nullopt;
    }
    for (double f : features) {
        if (!std::isfinite(f)) {
            error = "features must be finite";
            return std::nullopt;
        }
    }
    return features;
}

std::string trimmed(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

void run_interact(const InteractArgs& args, std::istream& in, std::ostream& out) {
    LoadedCheckpoint loaded = load_checkpoint(args.checkpoint_path);
    PolicyState& policy = loaded.policy;
    const std::string algorithm =
        args.algorithm.empty() ? loaded.algorithm : args.algorithm;
    const Strategy::Kind kind = parse_algorithm_name(algorithm);
    const double epsilon = policy.hyper.epsilon;
    const double alpha = kind == Strategy::Kind::linucb ? policy.hyper.alpha : 0.0;

    std::vector<std::string> names =
        args.action_names.empty() ? default_action_names(policy.hyper.k) : args.action_names;
    if (static_cast<int>(names.size()) != policy.hyper.k) {
        throw ValidationError("--action-names needs exactly " + std::to_string(policy.hyper.k) +
                              " entries");
    }

    std::ifstream feature_file;
    std::istream* features_in = &in;
    if (!args.features_path.empty()) {
        feature_file.open(args.features_path);
        if (!feature_file) throw IoError("cannot open " + args.features_path);
        features_in = &feature_file;
    }

    Rng rng(args.seed);
    out << "interactive session: " << algorithm << ", d=" << policy.hyper.d
        << ", k=" << policy.hyper.k << ", rounds learned so far " << policy.rounds_learned
        << "\n";
    out << "feature input: one JSON array per line; outcomes: 0 success, 1 failure, d discard, "
           "q quit\n";

    int item_counter = 0;
    std::string line;
    while (std::getline(*features_in, line)) {
        if (trimmed(line).empty()) continue;
        std::string parse_error;
        const auto features = parse_feature_line(trimmed(line), policy.hyper.d, parse_error);
        if (!features) {
            out << "bad feature line (" << parse_error << "); enter the item again\n";
            continue;
        }
        ++item_counter;
        Context ctx;
        ctx.features = *features;
        ctx.item_id = "item-" + std::to_string(item_counter);

        bool item_done = false;
        while (!item_done) {
            ActionId action;
            double propensity = 1.0;
            switch (kind) {
                case Strategy::Kind::greedy:
                    action = greedy_action(policy, ctx);
                    break;
                case Strategy::Kind::epsilon_greedy: {
                    const auto dist = epsilon_greedy_distribution(policy, ctx, epsilon);
                    action = sample_action(dist, rng);
                    propensity = dist.probs[action.index];
                    break;
                }
                case Strategy::Kind::linucb:
                    action = linucb_select(policy, ctx, alpha).first;
                    break;
            }

            const auto scores = linucb_scores(policy, ctx, alpha);
            out << ctx.item_id << ": try " << names[action.index] << " (action "
                << action.index << ")\n";
            char buf[128];
            for (int a = 0; a < policy.hyper.k; ++a) {
                std::snprintf(buf, sizeof(buf), "  %-18s est %+0.4f  width %0.4f  p(succ) ucb %0.4f",
                              names[a].c_str(), scores[a].estimate, scores[a].width,
                              success_probability_ucb(scores[a]));
                out << buf << (a == action.index ? "  <-" : "") << "\n";
            }
            out << "outcome [0/1/d/q]? " << std::flush;

            std::string outcome;
            if (!std::getline(in, outcome)) return;  // session ends with the input
            outcome = trimmed(outcome);
            if (outcome == "q") {
                out << "bye\n";
                return;
            }
            if (outcome == "d") {
                out << "attempt discarded; no update, same item\n";
                continue;
            }
            if (outcome != "0" && outcome != "1") {
                out << "unrecognized outcome '" << outcome
                    << "'; enter 0 (success), 1 (failure), d (discard), or q (quit)\n";
                continue;
            }
            const double loss = outcome == "1" ? 1.0 : 0.0;
            learn(policy, ctx, action, loss, propensity);
            save_checkpoint(policy, algorithm, args.checkpoint_path);
            if (loss == 0.0) {
                out << "success recorded; next item\n";
                item_done = true;
            } else {
                out << "failure recorded; same item again\n";
            }
        }
    }
    out << "no more items; session complete\n";
}

}  // namespace skewer
