#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skewer/policy.hpp"
#include "skewer/rng.hpp"
#include "skewer/types.hpp"

namespace skewer {

// One bandit-feedback record from a logged data collection run.
struct LoggedExample {
    std::string item_id;
    std::string class_label;
    std::vector<double> features;
    ActionId logged_action;
    double loss = 0.0;        // binary {0,1}
    double propensity = 1.0;  // (0,1]
};

// class label -> per-action mean loss, i.e. the herding imputation
// (success rate = 1 - mean loss).
using HerdingEstimate = std::map<std::string, std::vector<double>>;

// Mean loss per (class, action) cell over the dataset. Every cell must have
// at least one example; empty cells are a hard error listing the cells,
// since silently defaulting them would bias the imputation downstream.
HerdingEstimate herding_estimate(const std::vector<LoggedExample>& dataset, int k);

// Action indices within `tol` of the minimum entry.
std::vector<int> best_set_from_mean_losses(const std::vector<double>& mean_losses,
                                           double tol = 1e-9);

// A context with its doubly-robust full loss vector.
struct ImputedContext {
    Context context;
    std::vector<double> dr_losses;
    std::vector<int> best_set;  // argmin set of the class-level mean loss vector
};

// dr_losses[a] = lhat_a for a != a_i, and lhat_a + (l_i - lhat_a)/p_i for
// a = a_i. The herding map must cover every class in the dataset.
std::vector<ImputedContext> impute_dr_losses(const std::vector<LoggedExample>& dataset,
                                             const HerdingEstimate& herding);

struct SyntheticClassSpec {
    std::string label;
    std::vector<double> feature_center;
    double feature_noise_scale = 0.0;
    std::vector<double> success_rates;  // entries in [0,1], length k
};

// Ground-truth test bed: class labels with feature centers and known
// per-action success rates.
struct SyntheticSpec {
    int d = 0;
    int k = 0;
    std::vector<SyntheticClassSpec> classes;

    void validate() const;
    const SyntheticClassSpec& class_spec(const std::string& label) const;
    // 1 - success_rates, the true mean loss vector of a class.
    std::vector<double> expected_losses(const std::string& label) const;
    std::vector<int> best_set(const std::string& label) const;
};

struct StepResult {
    double loss = 0.0;
    bool success = false;
};

// A source of contexts and loss feedback. The resample-on-success rule
// lives in run_protocol; environments only know how to draw a new item and
// score an action against the current one. Each handle owns its random
// stream and serves one run at a time.
class Environment {
public:
    virtual ~Environment() = default;
    virtual int feature_dim() const = 0;
    virtual int action_count() const = 0;

    // Draws a new current item, restricted to a class when given. Throws
    // ValidationError if the class is unknown to this environment.
    virtual void next_item(const std::optional<std::string>& class_hint) = 0;

    // Valid after the first next_item call.
    virtual const Context& current() const = 0;

    // Index of the current item in the backing pool; -1 for generative
    // environments.
    virtual int current_pool_index() const { return -1; }

    // Loss feedback for taking `action` on the current item. Leaves the
    // current item unchanged.
    virtual StepResult observe(ActionId action) = 0;
};

using PoolPtr = std::shared_ptr<const std::vector<ImputedContext>>;

// Samples contexts uniformly with replacement from an imputed pool;
// observe returns the stored DR loss for the action, success iff that loss
// is below the threshold.
std::unique_ptr<Environment> make_replay_environment(PoolPtr pool, double success_threshold,
                                                     std::uint64_t seed);

// Draws a class uniformly (or as hinted), perturbs its feature center with
// Gaussian noise, and scores actions by Bernoulli draws on the class
// success rates.
std::unique_ptr<Environment> make_synthetic_environment(SyntheticSpec spec, std::uint64_t seed);

// Which class each sampled item / round belongs to. `cycle` advances per
// newly sampled item (a new item is drawn only after a success); `segments`
// pins rounds to classes, forcing an item change at segment boundaries.
struct ClassSchedule {
    enum class Mode { none, cycle, segments };
    Mode mode = Mode::none;
    std::vector<std::string> cycle_classes;
    std::vector<std::pair<std::string, int>> segments;  // (class, rounds)

    static ClassSchedule none() { return {}; }
    static ClassSchedule cycle(std::vector<std::string> classes);
    static ClassSchedule with_segments(std::vector<std::pair<std::string, int>> segments);

    std::optional<std::string> class_for_item(int item_ordinal) const;
    std::optional<std::string> class_for_round(int t) const;  // t is 1-based
    int total_segment_rounds() const;
};

// One row of a simulation or live session.
struct RoundRecord {
    int t = 0;  // 1-based round index
    std::string item_id;
    std::string class_label;
    int context_index = -1;  // into Trace::contexts
    int pool_index = -1;     // replay environments only
    ActionId action;
    double propensity = 1.0;
    double loss = 0.0;
    bool success = false;
    double cumulative_loss = 0.0;
    std::vector<LinUcbScore> arm_scores;  // filled for linucb runs
};

struct Trace {
    std::vector<Context> contexts;  // each distinct sampled item, in order
    std::vector<RoundRecord> records;
};

// The general contextual-bandit interaction loop: explore, sample the
// action, observe the loss, feed the oracle, and draw a fresh item only
// after a success. The policy is updated in place (pass a warm-started
// policy to resume training).
Trace run_protocol(Environment& env, PolicyState& policy, const Strategy& strategy, int rounds,
                   Rng& rng, const ClassSchedule& schedule = ClassSchedule::none());

// Uniform-logging bandit feedback from a synthetic ground truth
// (propensity 1/k per example).
std::vector<LoggedExample> generate_logged_dataset(const SyntheticSpec& spec, int n,
                                                   std::uint64_t seed);

}  // namespace skewer
