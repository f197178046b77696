#include "skewer/environment.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "skewer/errors.hpp"

namespace skewer {

HerdingEstimate herding_estimate(const std::vector<LoggedExample>& dataset, int k) {
    if (dataset.empty()) throw ValidationError("herding estimate needs a non-empty dataset");
    if (k < 1) throw ValidationError("herding estimate needs k >= 1");
    std::map<std::string, std::vector<double>> sums;
    std::map<std::string, std::vector<int>> counts;
    for (const auto& ex : dataset) {
        if (ex.logged_action.index < 0 || ex.logged_action.index >= k) {
            throw ValidationError("logged action " + std::to_string(ex.logged_action.index) +
                                  " out of range for k=" + std::to_string(k));
        }
        auto& s = sums[ex.class_label];
        auto& c = counts[ex.class_label];
        if (s.empty()) {
            s.assign(k, 0.0);
            c.assign(k, 0);
        }
        s[ex.logged_action.index] += ex.loss;
        c[ex.logged_action.index] += 1;
    }
    std::string empty_cells;
    HerdingEstimate estimate;
    for (const auto& [label, s] : sums) {
        const auto& c = counts[label];
        std::vector<double> means(k);
        for (int a = 0; a < k; ++a) {
            if (c[a] == 0) {
                if (!empty_cells.empty()) empty_cells += ", ";
                empty_cells += "(" + label + ", action " + std::to_string(a) + ")";
            } else {
                means[a] = s[a] / c[a];
            }
        }
        estimate[label] = std::move(means);
    }
    if (!empty_cells.empty()) {
        throw ValidationError("no logged examples for cells: " + empty_cells);
    }
    return estimate;
}

std::vector<int> best_set_from_mean_losses(const std::vector<double>& mean_losses, double tol) {
    const double lo = *std::min_element(mean_losses.begin(), mean_losses.end());
    std::vector<int> best;
    for (int a = 0; a < static_cast<int>(mean_losses.size()); ++a) {
        if (mean_losses[a] <= lo + tol) best.push_back(a);
    }
    return best;
}

std::vector<ImputedContext> impute_dr_losses(const std::vector<LoggedExample>& dataset,
                                             const HerdingEstimate& herding) {
    std::vector<ImputedContext> pool;
    pool.reserve(dataset.size());
    for (const auto& ex : dataset) {
        const auto it = herding.find(ex.class_label);
        if (it == herding.end()) {
            throw ValidationError("class '" + ex.class_label + "' missing from herding estimate");
        }
        const auto& lhat = it->second;
        ImputedContext imputed;
        imputed.context.features = ex.features;
        imputed.context.item_id = ex.item_id;
        imputed.context.class_label = ex.class_label;
        imputed.dr_losses = lhat;
        const int ai = ex.logged_action.index;
        imputed.dr_losses[ai] = lhat[ai] + (ex.loss - lhat[ai]) / ex.propensity;
        imputed.best_set = best_set_from_mean_losses(lhat);
        pool.push_back(std::move(imputed));
    }
    return pool;
}

void SyntheticSpec::validate() const {
    std::string problems;
    auto flag = [&problems](const std::string& msg) {
        if (!problems.empty()) problems += "; ";
        problems += msg;
    };
    if (d < 1) flag("d must be >= 1");
    if (k < 1) flag("k must be >= 1");
    if (classes.empty()) flag("at least one class is required");
    std::set<std::string> seen;
    for (const auto& c : classes) {
        if (!seen.insert(c.label).second) flag("duplicate class label '" + c.label + "'");
        if (static_cast<int>(c.feature_center.size()) != d) {
            flag("class '" + c.label + "' center has wrong dimension");
        }
        if (!(c.feature_noise_scale >= 0.0)) {
            flag("class '" + c.label + "' noise scale must be >= 0");
        }
        if (static_cast<int>(c.success_rates.size()) != k) {
            flag("class '" + c.label + "' needs " + std::to_string(k) + " success rates");
        }
        for (double r : c.success_rates) {
            if (!(r >= 0.0 && r <= 1.0)) {
                flag("class '" + c.label + "' has a success rate outside [0,1]");
                break;
            }
        }
    }
    if (!problems.empty()) throw ValidationError("invalid synthetic spec: " + problems);
}

const SyntheticClassSpec& SyntheticSpec::class_spec(const std::string& label) const {
    for (const auto& c : classes) {
        if (c.label == label) return c;
    }
    throw ValidationError("unknown class '" + label + "' in synthetic spec");
}

std::vector<double> SyntheticSpec::expected_losses(const std::string& label) const {
    const auto& c = class_spec(label);
    std::vector<double> losses(c.success_rates.size());
    for (std::size_t a = 0; a < losses.size(); ++a) losses[a] = 1.0 - c.success_rates[a];
    return losses;
}

std::vector<int> SyntheticSpec::best_set(const std::string& label) const {
    return best_set_from_mean_losses(expected_losses(label));
}

namespace {

class ReplayEnvironment final : public Environment {
public:
    ReplayEnvironment(PoolPtr pool, double success_threshold, std::uint64_t seed)
        : pool_(std::move(pool)), threshold_(success_threshold), rng_(seed) {
        if (!pool_ || pool_->empty()) {
            throw ValidationError("replay environment needs a non-empty imputed pool");
        }
        if (!(threshold_ > 0.0 && threshold_ < 1.0)) {
            throw ValidationError("success threshold must be in (0,1), got " +
                                  std::to_string(threshold_));
        }
        for (int i = 0; i < static_cast<int>(pool_->size()); ++i) {
            by_class_[(*pool_)[i].context.class_label].push_back(i);
        }
        dim_ = static_cast<int>(pool_->front().context.features.size());
        k_ = static_cast<int>(pool_->front().dr_losses.size());
    }

    int feature_dim() const override { return dim_; }
    int action_count() const override { return k_; }

    void next_item(const std::optional<std::string>& class_hint) override {
        if (class_hint) {
            const auto it = by_class_.find(*class_hint);
            if (it == by_class_.end()) {
                throw ValidationError("class '" + *class_hint + "' not present in replay pool");
            }
            index_ = it->second[rng_.uniform_int(static_cast<int>(it->second.size()))];
        } else {
            index_ = rng_.uniform_int(static_cast<int>(pool_->size()));
        }
        current_ = (*pool_)[index_].context;
        current_.item_id += "#" + std::to_string(++draws_);
    }

    const Context& current() const override { return current_; }
    int current_pool_index() const override { return index_; }

    StepResult observe(ActionId action) override {
        if (index_ < 0) throw RuntimeFailure("observe called before next_item");
        const double loss = (*pool_)[index_].dr_losses[action.index];
        return {loss, loss < threshold_};
    }

private:
    PoolPtr pool_;
    double threshold_;
    Rng rng_;
    std::map<std::string, std::vector<int>> by_class_;
    Context current_;
    int index_ = -1;
    int dim_ = 0;
    int k_ = 0;
    int draws_ = 0;
};

class SyntheticEnvironment final : public Environment {
public:
    SyntheticEnvironment(SyntheticSpec spec, std::uint64_t seed)
        : spec_(std::move(spec)), rng_(seed) {
        spec_.validate();
    }

    int feature_dim() const override { return spec_.d; }
    int action_count() const override { return spec_.k; }

    void next_item(const std::optional<std::string>& class_hint) override {
        if (class_hint) {
            class_index_ = -1;
            for (int i = 0; i < static_cast<int>(spec_.classes.size()); ++i) {
                if (spec_.classes[i].label == *class_hint) class_index_ = i;
            }
            if (class_index_ < 0) {
                throw ValidationError("class '" + *class_hint + "' not in synthetic spec");
            }
        } else {
            class_index_ = rng_.uniform_int(static_cast<int>(spec_.classes.size()));
        }
        const auto& cls = spec_.classes[class_index_];
        current_.features = cls.feature_center;
        if (cls.feature_noise_scale > 0.0) {
            for (double& f : current_.features) f += cls.feature_noise_scale * rng_.normal();
        }
        current_.class_label = cls.label;
        current_.item_id = cls.label + "#" + std::to_string(++draws_);
    }

    const Context& current() const override { return current_; }

    StepResult observe(ActionId action) override {
        if (class_index_ < 0) throw RuntimeFailure("observe called before next_item");
        const bool success =
            rng_.bernoulli(spec_.classes[class_index_].success_rates[action.index]);
        return {success ? 0.0 : 1.0, success};
    }

private:
    SyntheticSpec spec_;
    Rng rng_;
    Context current_;
    int class_index_ = -1;
    int draws_ = 0;
};

}  // namespace

std::unique_ptr<Environment> make_replay_environment(PoolPtr pool, double success_threshold,
                                                     std::uint64_t seed) {
    return std::make_unique<ReplayEnvironment>(std::move(pool), success_threshold, seed);
}

std::unique_ptr<Environment> make_synthetic_environment(SyntheticSpec spec, std::uint64_t seed) {
    return std::make_unique<SyntheticEnvironment>(std::move(spec), seed);
}

ClassSchedule ClassSchedule::cycle(std::vector<std::string> classes) {
    ClassSchedule schedule;
    schedule.mode = Mode::cycle;
    schedule.cycle_classes = std::move(classes);
    return schedule;
}

ClassSchedule ClassSchedule::with_segments(std::vector<std::pair<std::string, int>> segments) {
    ClassSchedule schedule;
    schedule.mode = Mode::segments;
    schedule.segments = std::move(segments);
    return schedule;
}

std::optional<std::string> ClassSchedule::class_for_item(int item_ordinal) const {
    if (mode != Mode::cycle || cycle_classes.empty()) return std::nullopt;
    return cycle_classes[item_ordinal % cycle_classes.size()];
}

std::optional<std::string> ClassSchedule::class_for_round(int t) const {
    if (mode != Mode::segments) return std::nullopt;
    int upto = 0;
    for (const auto& [label, rounds] : segments) {
        upto += rounds;
        if (t <= upto) return label;
    }
    return std::nullopt;  // rounds past the last segment are unconstrained
}

int ClassSchedule::total_segment_rounds() const {
    int total = 0;
    for (const auto& [label, rounds] : segments) total += rounds;
    return total;
}

Trace run_protocol(Environment& env, PolicyState& policy, const Strategy& strategy, int rounds,
                   Rng& rng, const ClassSchedule& schedule) {
    if (rounds < 1) throw ValidationError("rounds must be >= 1");
    if (env.feature_dim() != policy.hyper.d) {
        throw ValidationError("environment feature dim " + std::to_string(env.feature_dim()) +
                              " does not match policy d " + std::to_string(policy.hyper.d));
    }
    if (env.action_count() != policy.hyper.k) {
        throw ValidationError("environment action count " + std::to_string(env.action_count()) +
                              " does not match policy k " + std::to_string(policy.hyper.k));
    }

    Trace trace;
    trace.records.reserve(rounds);
    int items_sampled = 0;
    auto draw_item = [&](const std::optional<std::string>& hint) {
        env.next_item(hint);
        trace.contexts.push_back(env.current());
        ++items_sampled;
    };

    draw_item(schedule.mode == ClassSchedule::Mode::segments ? schedule.class_for_round(1)
                                                             : schedule.class_for_item(0));

    double cumulative = 0.0;
    for (int t = 1; t <= rounds; ++t) {
        if (schedule.mode == ClassSchedule::Mode::segments) {
            const auto want = schedule.class_for_round(t);
            if (want && *want != env.current().class_label) draw_item(want);
        }
        const Context& ctx = trace.contexts.back();

        RoundRecord rec;
        rec.t = t;
        rec.item_id = ctx.item_id;
        rec.class_label = ctx.class_label;
        rec.context_index = static_cast<int>(trace.contexts.size()) - 1;
        rec.pool_index = env.current_pool_index();

        switch (strategy.kind) {
            case Strategy::Kind::greedy: {
                rec.action = greedy_action(policy, ctx);
                rec.propensity = 1.0;
                break;
            }
            case Strategy::Kind::epsilon_greedy: {
                const auto dist = epsilon_greedy_distribution(policy, ctx, strategy.epsilon);
                rec.action = sample_action(dist, rng);
                rec.propensity = dist.probs[rec.action.index];
                break;
            }
            case Strategy::Kind::linucb: {
                rec.arm_scores = linucb_scores(policy, ctx, strategy.alpha);
                const auto [action, dist] = linucb_select(policy, ctx, strategy.alpha);
                rec.action = action;
                rec.propensity = 1.0;
                break;
            }
        }

        const StepResult result = env.observe(rec.action);
        learn(policy, ctx, rec.action, result.loss, rec.propensity);

        cumulative += result.loss;
        rec.loss = result.loss;
        rec.success = result.success;
        rec.cumulative_loss = cumulative;
        trace.records.push_back(std::move(rec));

        if (result.success && t < rounds) {
            draw_item(schedule.mode == ClassSchedule::Mode::segments
                          ? schedule.class_for_round(t + 1)
                          : schedule.class_for_item(items_sampled));
        }
    }
    return trace;
}

std::vector<LoggedExample> generate_logged_dataset(const SyntheticSpec& spec, int n,
                                                   std::uint64_t seed) {
    spec.validate();
    if (n < 1) throw ValidationError("dataset size must be >= 1");
    Rng rng(seed);
    std::vector<LoggedExample> dataset;
    dataset.reserve(n);
    for (int i = 0; i < n; ++i) {
        const int ci = rng.uniform_int(static_cast<int>(spec.classes.size()));
        const auto& cls = spec.classes[ci];
        LoggedExample ex;
        ex.class_label = cls.label;
        ex.item_id = cls.label + "-" + std::to_string(i);
        ex.features = cls.feature_center;
        if (cls.feature_noise_scale > 0.0) {
            for (double& f : ex.features) f += cls.feature_noise_scale * rng.normal();
        }
        ex.logged_action = ActionId{rng.uniform_int(spec.k)};
        ex.loss = rng.bernoulli(cls.success_rates[ex.logged_action.index]) ? 0.0 : 1.0;
        ex.propensity = 1.0 / spec.k;
        dataset.push_back(std::move(ex));
    }
    return dataset;
}

}  // namespace skewer
