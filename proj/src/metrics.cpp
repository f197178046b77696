#include "skewer/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "skewer/errors.hpp"
#include "skewer/kernels.hpp"
#include "skewer/linalg.hpp"

namespace skewer {

BaselineTheta fit_full_feedback(const std::vector<ImputedContext>& pool, double lambda) {
    if (pool.empty()) throw ValidationError("baseline fit needs a non-empty pool");
    if (!(lambda > 0.0)) throw ValidationError("baseline fit needs lambda > 0");
    const std::size_t d = pool.front().context.features.size();
    const std::size_t k = pool.front().dr_losses.size();

    std::vector<double> gram(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) gram[i * d + i] = lambda;
    std::vector<std::vector<double>> rhs(k, std::vector<double>(d, 0.0));
    for (const auto& entry : pool) {
        if (entry.context.features.size() != d || entry.dr_losses.size() != k) {
            throw ValidationError("inconsistent dimensions in imputed pool");
        }
        const double* phi = entry.context.features.data();
        kernels::rank1_update(gram.data(), phi, 1.0, d);
        for (std::size_t a = 0; a < k; ++a) {
            kernels::axpy(entry.dr_losses[a], phi, rhs[a].data(), d);
        }
    }

    std::vector<double> factor(d * d);
    linalg::cholesky_factor(gram.data(), factor.data(), d);
    BaselineTheta baseline;
    baseline.lambda_used = lambda;
    baseline.theta_star.assign(k, std::vector<double>(d));
    for (std::size_t a = 0; a < k; ++a) {
        linalg::cholesky_solve(factor.data(), rhs[a].data(), baseline.theta_star[a].data(), d);
    }
    return baseline;
}

ActionId baseline_action(const BaselineTheta& baseline, const Context& ctx) {
    int best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (int a = 0; a < static_cast<int>(baseline.theta_star.size()); ++a) {
        const auto& theta = baseline.theta_star[a];
        if (theta.size() != ctx.features.size()) {
            throw ValidationError("baseline dimension does not match context");
        }
        const double v = kernels::dot(theta.data(), ctx.features.data(), theta.size());
        if (v < best_value) {
            best_value = v;
            best = a;
        }
    }
    return ActionId{best};
}

PoolCounterfactuals::PoolCounterfactuals(PoolPtr pool) : pool_(std::move(pool)) {
    if (!pool_ || pool_->empty()) throw ValidationError("counterfactual pool is empty");
}

std::vector<double> PoolCounterfactuals::losses_for(const RoundRecord& rec) const {
    if (rec.pool_index < 0 || rec.pool_index >= static_cast<int>(pool_->size())) {
        throw ValidationError("round " + std::to_string(rec.t) +
                              " has no pool index; cannot resolve counterfactual losses");
    }
    return (*pool_)[rec.pool_index].dr_losses;
}

SyntheticCounterfactuals::SyntheticCounterfactuals(SyntheticSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
}

std::vector<double> SyntheticCounterfactuals::losses_for(const RoundRecord& rec) const {
    return spec_.expected_losses(rec.class_label);
}

RegretCurve cumulative_regret(const Trace& trace, const BaselineTheta& baseline,
                              const CounterfactualSource& source) {
    RegretCurve curve;
    curve.cumulative_regret.reserve(trace.records.size());
    curve.cumulative_loss.reserve(trace.records.size());
    double regret = 0.0;
    double loss = 0.0;
    for (const auto& rec : trace.records) {
        const Context& ctx = trace.contexts.at(rec.context_index);
        const auto counterfactual = source.losses_for(rec);
        const ActionId star = baseline_action(baseline, ctx);
        regret += rec.loss - counterfactual.at(star.index);
        loss += rec.loss;
        curve.cumulative_regret.push_back(regret);
        curve.cumulative_loss.push_back(loss);
    }
    return curve;
}

std::vector<double> cumulative_loss_curve(const Trace& trace) {
    std::vector<double> curve;
    curve.reserve(trace.records.size());
    double total = 0.0;
    for (const auto& rec : trace.records) {
        total += rec.loss;
        curve.push_back(total);
    }
    return curve;
}

std::optional<int> convergence_point(const Trace& trace,
                                     const std::map<std::string, std::vector<int>>& best_sets) {
    int earliest = 1;
    for (auto it = trace.records.rbegin(); it != trace.records.rend(); ++it) {
        const auto found = best_sets.find(it->class_label);
        if (found == best_sets.end()) {
            throw ValidationError("class '" + it->class_label + "' missing from best sets");
        }
        const auto& best = found->second;
        if (std::find(best.begin(), best.end(), it->action.index) == best.end()) {
            if (it == trace.records.rbegin()) return std::nullopt;
            earliest = it->t + 1;
            break;
        }
    }
    return earliest;
}

RandomProjection::RandomProjection(int input_dim, int target_dim, std::uint64_t seed)
    : input_dim_(input_dim), target_dim_(target_dim) {
    if (input_dim < 1 || target_dim < 1 || target_dim > input_dim) {
        throw ValidationError("projection target dimension must be in [1, " +
                              std::to_string(input_dim) + "], got " + std::to_string(target_dim));
    }
    Rng rng(derive_seed(seed, 0x70726F6A));
    const double scale = 1.0 / std::sqrt(static_cast<double>(target_dim));
    matrix_.resize(static_cast<std::size_t>(target_dim) * input_dim);
    for (double& v : matrix_) v = scale * rng.normal();
}

std::vector<double> RandomProjection::apply(const std::vector<double>& features) const {
    if (static_cast<int>(features.size()) != input_dim_) {
        throw ValidationError("projection input has wrong dimension");
    }
    std::vector<double> out(target_dim_);
    for (int i = 0; i < target_dim_; ++i) {
        out[i] = kernels::dot(matrix_.data() + static_cast<std::size_t>(i) * input_dim_,
                              features.data(), input_dim_);
    }
    return out;
}

std::vector<double> reduce_dimension(const std::vector<double>& features, int d_target,
                                     std::uint64_t seed) {
    const int input_dim = static_cast<int>(features.size());
    if (d_target < 1 || d_target > input_dim) {
        throw ValidationError("d_target must be in [1, " + std::to_string(input_dim) +
                              "], got " + std::to_string(d_target));
    }
    if (d_target == input_dim) return features;
    return RandomProjection(input_dim, d_target, seed).apply(features);
}

std::vector<ImputedContext> project_pool(const std::vector<ImputedContext>& pool,
                                         const RandomProjection& projection) {
    std::vector<ImputedContext> projected;
    projected.reserve(pool.size());
    for (const auto& entry : pool) {
        ImputedContext out = entry;
        out.context.features = projection.apply(entry.context.features);
        projected.push_back(std::move(out));
    }
    return projected;
}

namespace {

struct Stats {
    double mean = 0.0;
    double std_dev = 0.0;
    double ci95 = std::numeric_limits<double>::quiet_NaN();
};

Stats aggregate(const std::vector<double>& values) {
    Stats s;
    const int n = static_cast<int>(values.size());
    for (double v : values) s.mean += v;
    s.mean /= n;
    if (n >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std_dev = std::sqrt(ss / (n - 1));
        s.ci95 = 1.96 * s.std_dev / std::sqrt(static_cast<double>(n));
    }
    return s;
}

void apply_cell_params(const std::map<std::string, double>& params, HyperParams& hyper,
                       Strategy& strategy) {
    for (const auto& [name, value] : params) {
        if (name == "lambda") {
            hyper.lambda = value;
        } else if (name == "d") {
            if (value < 1.0 || value != std::floor(value)) {
                throw ValidationError("grid value for d must be a positive integer");
            }
            hyper.d = static_cast<int>(value);
        } else if (name == "epsilon") {
            if (strategy.kind != Strategy::Kind::epsilon_greedy) {
                throw ValidationError("grid parameter epsilon requires the epsilon_greedy "
                                      "algorithm");
            }
            hyper.epsilon = value;
            strategy.epsilon = value;
        } else if (name == "alpha") {
            if (strategy.kind != Strategy::Kind::linucb) {
                throw ValidationError("grid parameter alpha requires the linucb algorithm");
            }
            hyper.alpha = value;
            strategy.alpha = value;
        } else {
            throw ValidationError("unknown grid parameter '" + name + "'");
        }
    }
}

void run_cell(const SweepScenario& scenario, int seeds, SweepCell& cell) {
    HyperParams hyper = scenario.base_hyper;
    Strategy strategy;
    strategy.kind = scenario.algorithm;
    strategy.epsilon = hyper.epsilon;
    strategy.alpha = hyper.alpha;
    apply_cell_params(cell.params, hyper, strategy);

    PoolPtr pool;
    std::unique_ptr<BaselineTheta> baseline;
    if (scenario.pool_for_cell) {
        pool = scenario.pool_for_cell(cell.params);
        if (pool) baseline = std::make_unique<BaselineTheta>(fit_full_feedback(*pool, hyper.lambda));
    }

    std::vector<double> losses, regrets;
    losses.reserve(seeds);
    for (int s = 0; s < seeds; ++s) {
        // Seeds depend only on the seed index, not the cell, so every cell
        // sees the same environment streams (paired comparison).
        const std::uint64_t env_seed = derive_seed(scenario.base_seed, 2 * s);
        const std::uint64_t protocol_seed = derive_seed(scenario.base_seed, 2 * s + 1);
        auto env = scenario.make_env(cell.params, env_seed);
        PolicyState policy = init_policy(hyper);
        Rng rng(protocol_seed);
        const Trace trace =
            run_protocol(*env, policy, strategy, scenario.rounds, rng, scenario.schedule);
        losses.push_back(trace.records.back().cumulative_loss);
        if (baseline) {
            PoolCounterfactuals source(pool);
            regrets.push_back(
                cumulative_regret(trace, *baseline, source).cumulative_regret.back());
        }
    }

    cell.seeds_run = seeds;
    const Stats loss_stats = aggregate(losses);
    cell.mean_loss = loss_stats.mean;
    cell.std_loss = loss_stats.std_dev;
    cell.ci95_loss = loss_stats.ci95;
    if (!regrets.empty()) {
        const Stats regret_stats = aggregate(regrets);
        cell.mean_regret = regret_stats.mean;
        cell.std_regret = regret_stats.std_dev;
        cell.ci95_regret = regret_stats.ci95;
        cell.has_regret = true;
    }
}

}  // namespace

std::optional<std::size_t> SweepReport::argmin_cell() const {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!cells[i].error.empty()) continue;
        if (!best || cells[i].mean_loss < cells[*best].mean_loss) best = i;
    }
    return best;
}

SweepReport run_sweep(const SweepScenario& scenario, const SweepGrid& grid, int seeds, int jobs) {
    if (grid.empty()) throw ValidationError("sweep grid is empty");
    if (seeds < 1) throw ValidationError("sweep needs at least one seed");
    if (!scenario.make_env) throw ValidationError("sweep scenario has no environment factory");
    for (const auto& [name, values] : grid) {
        if (values.empty()) throw ValidationError("grid axis '" + name + "' has no values");
    }

    SweepReport report;
    for (const auto& [name, values] : grid) report.param_names.push_back(name);

    // Cross product, first axis slowest.
    std::size_t n_cells = 1;
    for (const auto& [name, values] : grid) n_cells *= values.size();
    report.cells.resize(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
        std::size_t rest = i;
        for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
            report.cells[i].params[it->first] = it->second[rest % it->second.size()];
            rest /= it->second.size();
        }
    }

    if (jobs < 1) jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;
    jobs = std::min<std::size_t>(jobs, n_cells);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_cells) return;
            try {
                run_cell(scenario, seeds, report.cells[i]);
            } catch (const std::exception& e) {
                report.cells[i].error = e.what();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(jobs);
        for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    return report;
}

}  // namespace skewer
