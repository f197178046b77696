#include "skewer/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "skewer/dataset_io.hpp"
#include "skewer/errors.hpp"

namespace skewer {

using nlohmann::json;

namespace {

// Collects every validation problem so the whole config is reported at once.
struct Problems {
    std::string origin;
    std::vector<std::string> items;

    void add(const std::string& msg) { items.push_back(msg); }

    void raise_if_any() const {
        if (items.empty()) return;
        std::string text = origin + ": invalid configuration:";
        for (const auto& item : items) text += "\n  - " + item;
        throw ValidationError(text);
    }
};

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where,
                Problems& problems) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) problems.add(where + ": unknown key '" + key + "'");
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(origin + ": malformed JSON: " + e.what());
    }
}

template <typename T>
std::optional<T> get_field(const json& obj, const std::string& key, const char* type_name,
                           const std::string& where, Problems& problems) {
    if (!obj.contains(key)) return std::nullopt;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        problems.add(where + ": '" + key + "' must be " + type_name);
        return std::nullopt;
    }
}

std::optional<std::vector<double>> get_number_array(const json& obj, const std::string& key,
                                                    const std::string& where,
                                                    Problems& problems) {
    if (!obj.contains(key)) return std::nullopt;
    const json& node = obj.at(key);
    if (!node.is_array()) {
        problems.add(where + ": '" + key + "' must be an array of numbers");
        return std::nullopt;
    }
    std::vector<double> values;
    for (const auto& v : node) {
        if (!v.is_number()) {
            problems.add(where + ": '" + key + "' must be an array of numbers");
            return std::nullopt;
        }
        values.push_back(v.get<double>());
    }
    return values;
}

SyntheticSpec parse_synthetic_spec_json(const json& obj, Problems& problems) {
    SyntheticSpec spec;
    if (!obj.is_object()) {
        problems.add("synthetic spec must be a JSON object");
        return spec;
    }
    check_keys(obj, {"d", "k", "classes"}, "spec", problems);
    spec.d = get_field<int>(obj, "d", "an integer", "spec", problems).value_or(0);
    spec.k = get_field<int>(obj, "k", "an integer", "spec", problems).value_or(0);
    if (!obj.contains("d")) problems.add("spec: 'd' is required");
    if (!obj.contains("k")) problems.add("spec: 'k' is required");
    if (!obj.contains("classes") || !obj.at("classes").is_array()) {
        problems.add("spec: 'classes' must be an array");
        return spec;
    }
    for (const auto& cls : obj.at("classes")) {
        const std::string where = "spec class " + std::to_string(spec.classes.size());
        if (!cls.is_object()) {
            problems.add(where + ": must be an object");
            continue;
        }
        check_keys(cls, {"label", "center", "noise_scale", "success_rates"}, where, problems);
        SyntheticClassSpec out;
        out.label =
            get_field<std::string>(cls, "label", "a string", where, problems).value_or("");
        if (out.label.empty()) problems.add(where + ": 'label' is required");
        out.feature_center =
            get_number_array(cls, "center", where, problems).value_or(std::vector<double>{});
        if (!cls.contains("center")) problems.add(where + ": 'center' is required");
        out.feature_noise_scale =
            get_field<double>(cls, "noise_scale", "a number", where, problems).value_or(0.0);
        out.success_rates = get_number_array(cls, "success_rates", where, problems)
                                .value_or(std::vector<double>{});
        if (!cls.contains("success_rates")) problems.add(where + ": 'success_rates' is required");
        spec.classes.push_back(std::move(out));
    }
    if (problems.items.empty()) {
        try {
            spec.validate();
        } catch (const ValidationError& e) {
            problems.add(e.what());
        }
    }
    return spec;
}

}  // namespace

SyntheticSpec parse_synthetic_spec_text(const std::string& text, const std::string& origin) {
    Problems problems{origin, {}};
    const SyntheticSpec spec = parse_synthetic_spec_json(parse_json_text(text, origin), problems);
    problems.raise_if_any();
    return spec;
}

SyntheticSpec parse_synthetic_spec_file(const std::string& path) {
    return parse_synthetic_spec_text(read_file(path), path);
}

ScenarioConfig parse_scenario_text(const std::string& text, const std::string& origin) {
    const json obj = parse_json_text(text, origin);
    Problems problems{origin, {}};
    ScenarioConfig config;
    if (!obj.is_object()) {
        problems.add("config must be a JSON object");
        problems.raise_if_any();
    }
    check_keys(obj,
               {"environment", "algorithm", "hyper", "rounds", "seed", "class_schedule",
                "warm_start", "projection", "action_names"},
               "config", problems);

    // environment
    if (!obj.contains("environment") || !obj.at("environment").is_object()) {
        problems.add("config: 'environment' object is required");
    } else {
        const json& env = obj.at("environment");
        const auto kind =
            get_field<std::string>(env, "kind", "a string", "environment", problems);
        if (kind == std::string("synthetic")) {
            config.env_kind = ScenarioConfig::EnvKind::synthetic;
            check_keys(env, {"kind", "spec"}, "environment", problems);
            if (!env.contains("spec")) {
                problems.add("environment: synthetic needs 'spec' (path or inline object)");
            } else if (env.at("spec").is_string()) {
                config.spec_path = env.at("spec").get<std::string>();
            } else {
                config.inline_spec = parse_synthetic_spec_json(env.at("spec"), problems);
            }
        } else if (kind == std::string("replay")) {
            config.env_kind = ScenarioConfig::EnvKind::replay;
            check_keys(env, {"kind", "pool", "success_threshold"}, "environment", problems);
            config.pool_path =
                get_field<std::string>(env, "pool", "a string", "environment", problems)
                    .value_or("");
            if (config.pool_path.empty()) problems.add("environment: replay needs 'pool'");
            config.success_threshold =
                get_field<double>(env, "success_threshold", "a number", "environment", problems)
                    .value_or(0.5);
            if (!(config.success_threshold > 0.0 && config.success_threshold < 1.0)) {
                problems.add("environment: success_threshold must be in (0,1)");
            }
        } else {
            problems.add("environment: 'kind' must be \"synthetic\" or \"replay\"");
        }
    }

    // algorithm
    const auto algorithm =
        get_field<std::string>(obj, "algorithm", "a string", "config", problems);
    if (!algorithm) {
        problems.add("config: 'algorithm' is required");
    } else if (*algorithm == "greedy") {
        config.algorithm = Strategy::Kind::greedy;
    } else if (*algorithm == "epsilon_greedy") {
        config.algorithm = Strategy::Kind::epsilon_greedy;
    } else if (*algorithm == "linucb") {
        config.algorithm = Strategy::Kind::linucb;
    } else {
        problems.add("config: unknown algorithm '" + *algorithm +
                     "' (expected greedy, epsilon_greedy, or linucb)");
    }

    // hyper
    if (!obj.contains("hyper") || !obj.at("hyper").is_object()) {
        problems.add("config: 'hyper' object is required");
    } else {
        const json& hyper = obj.at("hyper");
        check_keys(hyper, {"d", "k", "lambda", "epsilon", "alpha"}, "hyper", problems);
        config.hyper.d = get_field<int>(hyper, "d", "an integer", "hyper", problems).value_or(0);
        config.hyper.k = get_field<int>(hyper, "k", "an integer", "hyper", problems).value_or(0);
        config.hyper.lambda =
            get_field<double>(hyper, "lambda", "a number", "hyper", problems).value_or(0.0);
        if (!hyper.contains("d")) problems.add("hyper: 'd' is required");
        if (!hyper.contains("k")) problems.add("hyper: 'k' is required");
        if (!hyper.contains("lambda")) problems.add("hyper: 'lambda' is required");
        config.hyper.epsilon =
            get_field<double>(hyper, "epsilon", "a number", "hyper", problems).value_or(0.0);
        config.hyper.alpha =
            get_field<double>(hyper, "alpha", "a number", "hyper", problems).value_or(0.0);
        try {
            config.hyper.validate();
        } catch (const ValidationError& e) {
            problems.add(e.what());
        }
    }

    // rounds / seed
    config.rounds = get_field<int>(obj, "rounds", "an integer", "config", problems).value_or(0);
    if (!obj.contains("rounds")) {
        problems.add("config: 'rounds' is required");
    } else if (config.rounds < 1) {
        problems.add("config: 'rounds' must be >= 1 (got " + std::to_string(config.rounds) +
                     ")");
    }
    config.seed = get_field<std::uint64_t>(obj, "seed", "an unsigned integer", "config", problems)
                      .value_or(0);
    if (!obj.contains("seed")) problems.add("config: 'seed' is required");

    // class_schedule
    if (obj.contains("class_schedule")) {
        const json& sched = obj.at("class_schedule");
        if (!sched.is_object()) {
            problems.add("class_schedule: must be an object");
        } else {
            check_keys(sched, {"cycle", "segments"}, "class_schedule", problems);
            if (sched.contains("cycle") == sched.contains("segments")) {
                problems.add("class_schedule: exactly one of 'cycle' or 'segments' is required");
            } else if (sched.contains("cycle")) {
                std::vector<std::string> classes;
                bool ok = sched.at("cycle").is_array() && !sched.at("cycle").empty();
                if (ok) {
                    for (const auto& c : sched.at("cycle")) {
                        if (!c.is_string()) ok = false;
                        else classes.push_back(c.get<std::string>());
                    }
                }
                if (!ok) {
                    problems.add("class_schedule: 'cycle' must be a non-empty array of strings");
                } else {
                    config.schedule = ClassSchedule::cycle(std::move(classes));
                }
            } else {
                std::vector<std::pair<std::string, int>> segments;
                bool ok = sched.at("segments").is_array() && !sched.at("segments").empty();
                if (ok) {
                    for (const auto& seg : sched.at("segments")) {
                        const std::string where =
                            "class_schedule segment " + std::to_string(segments.size());
                        if (!seg.is_object()) {
                            problems.add(where + ": must be an object");
                            ok = false;
                            break;
                        }
                        check_keys(seg, {"class", "rounds"}, where, problems);
                        const auto cls =
                            get_field<std::string>(seg, "class", "a string", where, problems);
                        const auto rounds =
                            get_field<int>(seg, "rounds", "an integer", where, problems);
                        if (!cls || !rounds || *rounds < 1) {
                            problems.add(where + ": needs 'class' and 'rounds' >= 1");
                            ok = false;
                            break;
                        }
                        segments.emplace_back(*cls, *rounds);
                    }
                } else {
                    problems.add("class_schedule: 'segments' must be a non-empty array");
                }
                if (ok) config.schedule = ClassSchedule::with_segments(std::move(segments));
            }
        }
    }

    // warm_start / projection / action_names
    if (obj.contains("warm_start")) {
        const auto path =
            get_field<std::string>(obj, "warm_start", "a string", "config", problems);
        if (path) config.warm_start = *path;
    }
    if (obj.contains("projection")) {
        const json& proj = obj.at("projection");
        if (!proj.is_object()) {
            problems.add("projection: must be an object");
        } else {
            check_keys(proj, {"d_target", "seed"}, "projection", problems);
            const auto d_target =
                get_field<int>(proj, "d_target", "an integer", "projection", problems);
            if (!d_target || *d_target < 1) {
                problems.add("projection: 'd_target' must be an integer >= 1");
            } else {
                config.projection_d = *d_target;
            }
            const auto pseed = get_field<std::uint64_t>(proj, "seed", "an unsigned integer",
                                                        "projection", problems);
            if (pseed) config.projection_seed = *pseed;
        }
    }
    if (obj.contains("action_names")) {
        bool ok = obj.at("action_names").is_array();
        if (ok) {
            for (const auto& name : obj.at("action_names")) {
                if (!name.is_string()) ok = false;
                else config.action_names.push_back(name.get<std::string>());
            }
        }
        if (!ok) {
            problems.add("config: 'action_names' must be an array of strings");
        } else if (config.hyper.k >= 1 &&
                   static_cast<int>(config.action_names.size()) != config.hyper.k) {
            problems.add("config: 'action_names' needs exactly " +
                         std::to_string(config.hyper.k) + " entries");
        }
    }

    problems.raise_if_any();
    return config;
}

ScenarioConfig parse_scenario_file(const std::string& path) {
    return parse_scenario_text(read_file(path), path);
}

namespace {

class ProjectedEnvironment final : public Environment {
public:
    ProjectedEnvironment(std::unique_ptr<Environment> inner,
                         std::shared_ptr<const RandomProjection> projection)
        : inner_(std::move(inner)), projection_(std::move(projection)) {
        if (inner_->feature_dim() != projection_->input_dim()) {
            throw ValidationError("projection input dimension does not match environment");
        }
    }

    int feature_dim() const override { return projection_->target_dim(); }
    int action_count() const override { return inner_->action_count(); }

    void next_item(const std::optional<std::string>& class_hint) override {
        inner_->next_item(class_hint);
        current_ = inner_->current();
        current_.features = projection_->apply(current_.features);
    }

    const Context& current() const override { return current_; }
    int current_pool_index() const override { return inner_->current_pool_index(); }
    StepResult observe(ActionId action) override { return inner_->observe(action); }

private:
    std::unique_ptr<Environment> inner_;
    std::shared_ptr<const RandomProjection> projection_;
    Context current_;
};

}  // namespace

std::unique_ptr<Environment> make_projected_environment(
    std::unique_ptr<Environment> inner, std::shared_ptr<const RandomProjection> projection) {
    return std::make_unique<ProjectedEnvironment>(std::move(inner), std::move(projection));
}

std::unique_ptr<Environment> LoadedScenario::make_environment(std::uint64_t env_seed) const {
    std::unique_ptr<Environment> env;
    if (config.env_kind == ScenarioConfig::EnvKind::synthetic) {
        env = make_synthetic_environment(*synthetic, env_seed);
        if (projection) env = make_projected_environment(std::move(env), projection);
    } else {
        // The pool is already projected.
        env = make_replay_environment(pool, config.success_threshold, env_seed);
    }
    return env;
}

std::map<std::string, std::vector<int>> LoadedScenario::best_sets() const {
    std::map<std::string, std::vector<int>> sets;
    if (synthetic) {
        for (const auto& cls : synthetic->classes) sets[cls.label] = synthetic->best_set(cls.label);
    } else if (pool) {
        for (const auto& entry : *pool) {
            sets.emplace(entry.context.class_label, entry.best_set);
        }
    }
    return sets;
}

std::vector<std::string> LoadedScenario::action_names() const {
    if (!config.action_names.empty()) return config.action_names;
    return default_action_names(config.hyper.k);
}

LoadedScenario load_scenario(const ScenarioConfig& config) {
    LoadedScenario loaded;
    loaded.config = config;
    loaded.strategy.kind = config.algorithm;
    loaded.strategy.epsilon = config.hyper.epsilon;
    loaded.strategy.alpha = config.hyper.alpha;

    int env_dim = 0;
    int env_k = 0;
    if (config.env_kind == ScenarioConfig::EnvKind::synthetic) {
        loaded.synthetic = config.inline_spec ? *config.inline_spec
                                              : parse_synthetic_spec_file(config.spec_path);
        env_dim = loaded.synthetic->d;
        env_k = loaded.synthetic->k;
    } else {
        auto pool = parse_pool(config.pool_path);
        if (pool.empty()) throw ValidationError(config.pool_path + ": pool is empty");
        env_dim = static_cast<int>(pool.front().context.features.size());
        env_k = static_cast<int>(pool.front().dr_losses.size());
        loaded.pool = std::make_shared<const std::vector<ImputedContext>>(std::move(pool));
    }

    if (config.projection_d) {
        const std::uint64_t proj_seed =
            config.projection_seed ? *config.projection_seed : derive_seed(config.seed, 0x646A70);
        loaded.projection =
            std::make_shared<const RandomProjection>(env_dim, *config.projection_d, proj_seed);
        env_dim = *config.projection_d;
        if (loaded.pool) {
            loaded.pool = std::make_shared<const std::vector<ImputedContext>>(
                project_pool(*loaded.pool, *loaded.projection));
            loaded.projection.reset();  // folded into the pool
        }
    }

    if (config.hyper.d != env_dim) {
        throw ValidationError("hyper.d = " + std::to_string(config.hyper.d) +
                              " but the environment provides " + std::to_string(env_dim) +
                              "-dimensional features" +
                              (config.projection_d ? " after projection" : ""));
    }
    if (config.hyper.k != env_k) {
        throw ValidationError("hyper.k = " + std::to_string(config.hyper.k) +
                              " but the environment has " + std::to_string(env_k) + " actions");
    }

    // Schedule classes must exist.
    std::vector<std::string> classes;
    if (config.schedule.mode == ClassSchedule::Mode::cycle) {
        classes = config.schedule.cycle_classes;
    } else if (config.schedule.mode == ClassSchedule::Mode::segments) {
        for (const auto& [label, rounds] : config.schedule.segments) classes.push_back(label);
    }
    const auto known = loaded.best_sets();
    for (const auto& label : classes) {
        if (!known.count(label)) {
            throw ValidationError("class_schedule references unknown class '" + label + "'");
        }
    }
    return loaded;
}

}  // namespace skewer
