#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "skewer/environment.hpp"

namespace skewer {

// Full-feedback least-squares baseline theta*, one vector per action.
struct BaselineTheta {
    std::vector<std::vector<double>> theta_star;
    double lambda_used = 0.0;
};

// Per action a: theta_star[a] = (Phi^T Phi + lambda I)^{-1} Phi^T l_a over
// the pool's DR loss vectors (no importance weights; full feedback).
BaselineTheta fit_full_feedback(const std::vector<ImputedContext>& pool, double lambda);

// Baseline policy's action on a context: argmin_a theta*_a . phi, lowest
// index on ties.
ActionId baseline_action(const BaselineTheta& baseline, const Context& ctx);

// Resolves a trace round to the full per-action loss vector needed for
// counterfactual evaluation.
class CounterfactualSource {
public:
    virtual ~CounterfactualSource() = default;
    virtual std::vector<double> losses_for(const RoundRecord& rec) const = 0;
};

// Counterfactuals from the stored DR vectors, looked up by pool index.
class PoolCounterfactuals final : public CounterfactualSource {
public:
    explicit PoolCounterfactuals(PoolPtr pool);
    std::vector<double> losses_for(const RoundRecord& rec) const override;

private:
    PoolPtr pool_;
};

// Counterfactuals from a synthetic ground truth: the expected loss vector
// of the round's class.
class SyntheticCounterfactuals final : public CounterfactualSource {
public:
    explicit SyntheticCounterfactuals(SyntheticSpec spec);
    std::vector<double> losses_for(const RoundRecord& rec) const override;

private:
    SyntheticSpec spec_;
};

struct RegretCurve {
    std::vector<double> cumulative_regret;  // R_t per round
    std::vector<double> cumulative_loss;
};

// R_t = sum_{s<=t} [loss_s - counterfactual_s(pi*(phi_s))].
RegretCurve cumulative_regret(const Trace& trace, const BaselineTheta& baseline,
                              const CounterfactualSource& source);

// Running sum of per-round losses.
std::vector<double> cumulative_loss_curve(const Trace& trace);

// Smallest 1-based t such that every action from round t on lies in the
// best set of its round's class; nullopt when the last round violates.
std::optional<int> convergence_point(const Trace& trace,
                                     const std::map<std::string, std::vector<int>>& best_sets);

// Seeded Gaussian random projection with entries N(0, 1/d_target); the
// matrix is a pure function of (input_dim, target_dim, seed).
class RandomProjection {
public:
    RandomProjection(int input_dim, int target_dim, std::uint64_t seed);

    int input_dim() const { return input_dim_; }
    int target_dim() const { return target_dim_; }

    std::vector<double> apply(const std::vector<double>& features) const;

private:
    int input_dim_;
    int target_dim_;
    std::vector<double> matrix_;  // row-major target_dim x input_dim
};

// Identity when d_target equals the input dimension.
std::vector<double> reduce_dimension(const std::vector<double>& features, int d_target,
                                     std::uint64_t seed);

// Applies one projection to every context of a pool (DR losses unchanged).
std::vector<ImputedContext> project_pool(const std::vector<ImputedContext>& pool,
                                         const RandomProjection& projection);

// ---------------------------------------------------------------------------
// Hyper-parameter sweep

// Named parameter axes; the cross product forms the grid. Valid names:
// lambda, d, epsilon, alpha.
using SweepGrid = std::vector<std::pair<std::string, std::vector<double>>>;

struct SweepCell {
    std::map<std::string, double> params;
    int seeds_run = 0;
    double mean_loss = 0.0;
    double std_loss = 0.0;
    double ci95_loss = 0.0;  // NaN when seeds < 2
    double mean_regret = 0.0;
    double std_regret = 0.0;
    double ci95_regret = 0.0;
    bool has_regret = false;
    std::string error;  // non-empty when the cell failed
};

struct SweepReport {
    std::vector<std::string> param_names;
    std::vector<SweepCell> cells;

    // Cell with the lowest mean loss among cells that ran; nullopt when all
    // cells failed.
    std::optional<std::size_t> argmin_cell() const;
};

// Everything a sweep run needs to build one seeded rollout. make_env must
// be thread-safe (cells run concurrently); results are written into
// per-cell slots so the report is identical regardless of execution order
// or parallelism.
struct SweepScenario {
    std::function<std::unique_ptr<Environment>(const std::map<std::string, double>& params,
                                               std::uint64_t env_seed)>
        make_env;
    // Optional: pool for this cell's params, enabling regret against a
    // per-cell fitted baseline.
    std::function<PoolPtr(const std::map<std::string, double>& params)> pool_for_cell;
    HyperParams base_hyper;
    Strategy::Kind algorithm = Strategy::Kind::greedy;
    int rounds = 1;
    std::uint64_t base_seed = 0;
    ClassSchedule schedule;
};

SweepReport run_sweep(const SweepScenario& scenario, const SweepGrid& grid, int seeds, int jobs);

}  // namespace skewer
