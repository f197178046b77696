#include "skewer/metrics.hpp"

#include <cmath>

#include "doctest.h"
#include "oracle.hpp"
#include "skewer/errors.hpp"

using namespace skewer;

namespace {

std::vector<ImputedContext> small_pool() {
    std::vector<ImputedContext> pool(3);
    pool[0].context = {{1.0, 0.0}, "a-1", "a"};
    pool[0].dr_losses = {0.1, 0.9};
    pool[0].best_set = {0};
    pool[1].context = {{0.0, 1.0}, "b-1", "b"};
    pool[1].dr_losses = {0.8, 0.2};
    pool[1].best_set = {1};
    pool[2].context = {{1.0, 1.0}, "c-1", "c"};
    pool[2].dr_losses = {0.5, 0.5};
    pool[2].best_set = {0, 1};
    return pool;
}

SyntheticSpec basis_spec() {
    SyntheticSpec spec;
    spec.d = 2;
    spec.k = 2;
    spec.classes = {{"a", {1.0, 0.0}, 0.0, {0.9, 0.2}}, {"b", {0.0, 1.0}, 0.0, {0.2, 0.9}}};
    return spec;
}

}  // namespace

TEST_CASE("fit_full_feedback trivial cases") {
    auto pool = small_pool();
    for (auto& entry : pool) entry.dr_losses = {0.0, 0.0};
    const auto zero = fit_full_feedback(pool, 1.0);
    for (const auto& theta : zero.theta_star) {
        for (double v : theta) CHECK(v == 0.0);
    }

    const auto ridge_limit = fit_full_feedback(small_pool(), 1e9);
    for (const auto& theta : ridge_limit.theta_star) {
        for (double v : theta) CHECK(std::abs(v) < 1e-6);
    }

    CHECK_THROWS_AS(fit_full_feedback({}, 1.0), ValidationError);
}

TEST_CASE("fit_full_feedback matches the dense normal-equations oracle") {
    Rng rng(808);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 1 + rng.uniform_int(8);
        const int k = 1 + rng.uniform_int(4);
        const int n = 1 + rng.uniform_int(50);
        const double lambda = 0.25 + rng.uniform01() * 3.0;
        std::vector<ImputedContext> pool(n);
        std::vector<std::vector<double>> rows(n), targets(n);
        for (int i = 0; i < n; ++i) {
            pool[i].context.features.resize(d);
            for (double& f : pool[i].context.features) f = rng.normal();
            pool[i].dr_losses.resize(k);
            for (double& l : pool[i].dr_losses) l = rng.normal();
            rows[i] = pool[i].context.features;
            targets[i] = pool[i].dr_losses;
        }
        const auto fitted = fit_full_feedback(pool, lambda);
        const auto expected = oracle::full_feedback_ridge(rows, targets, lambda);
        for (int a = 0; a < k; ++a) {
            for (int j = 0; j < d; ++j) {
                CHECK(std::abs(fitted.theta_star[a][j] - expected[a][j]) < 1e-8);
            }
        }
    }
}

TEST_CASE("cumulative_regret is zero for the baseline's own trace") {
    const auto pool_data = small_pool();
    auto pool = std::make_shared<const std::vector<ImputedContext>>(pool_data);
    const auto baseline = fit_full_feedback(pool_data, 0.001);

    Trace trace;
    for (int i = 0; i < 3; ++i) {
        trace.contexts.push_back(pool_data[i].context);
        RoundRecord rec;
        rec.t = i + 1;
        rec.context_index = i;
        rec.pool_index = i;
        rec.class_label = pool_data[i].context.class_label;
        rec.action = baseline_action(baseline, pool_data[i].context);
        rec.loss = pool_data[i].dr_losses[rec.action.index];
        trace.records.push_back(rec);
    }
    const auto curve = cumulative_regret(trace, baseline, PoolCounterfactuals(pool));
    for (double r : curve.cumulative_regret) CHECK(r == doctest::Approx(0.0));

    // Single round where the policy lost 1 and the baseline loses 0.
    Trace single;
    single.contexts.push_back(pool_data[0].context);
    RoundRecord rec;
    rec.t = 1;
    rec.context_index = 0;
    rec.pool_index = 0;
    rec.class_label = "a";
    rec.action = ActionId{1};
    rec.loss = 1.0;
    single.records.push_back(rec);
    auto pool2 = pool_data;
    pool2[0].dr_losses = {0.0, 1.0};
    const auto curve2 =
        cumulative_regret(single, baseline,
                          PoolCounterfactuals(
                              std::make_shared<const std::vector<ImputedContext>>(pool2)));
    CHECK(curve2.cumulative_regret == std::vector<double>{1.0});
}

TEST_CASE("cumulative_loss_curve running sums") {
    Trace trace;
    for (const double loss : {1.0, 0.0, 1.0}) {
        RoundRecord rec;
        rec.loss = loss;
        trace.records.push_back(rec);
    }
    CHECK(cumulative_loss_curve(trace) == std::vector<double>{1.0, 1.0, 2.0});

    Trace empty;
    CHECK(cumulative_loss_curve(empty).empty());
}

TEST_CASE("convergence_point definition checks") {
    const std::map<std::string, std::vector<int>> best_sets{{"a", {0}}, {"b", {1}}};
    auto make_trace = [](const std::vector<std::pair<std::string, int>>& rounds) {
        Trace trace;
        int t = 0;
        for (const auto& [cls, action] : rounds) {
            RoundRecord rec;
            rec.t = ++t;
            rec.class_label = cls;
            rec.action = ActionId{action};
            trace.records.push_back(rec);
        }
        return trace;
    };

    CHECK(convergence_point(make_trace({{"a", 0}, {"b", 1}, {"a", 0}}), best_sets) == 1);
    CHECK_FALSE(
        convergence_point(make_trace({{"a", 0}, {"b", 1}, {"a", 1}}), best_sets).has_value());

    // Violation only at t = 7 of 10 rounds -> 8.
    std::vector<std::pair<std::string, int>> rounds(10, {"a", 0});
    rounds[6] = {"a", 1};
    CHECK(convergence_point(make_trace(rounds), best_sets) == 8);

    CHECK_THROWS_AS(convergence_point(make_trace({{"zzz", 0}}), best_sets), ValidationError);

    // Enlarging a best set never pushes the point later.
    const std::map<std::string, std::vector<int>> larger{{"a", {0, 1}}, {"b", {1}}};
    const auto tight = convergence_point(make_trace(rounds), best_sets);
    const auto loose = convergence_point(make_trace(rounds), larger);
    REQUIRE(loose.has_value());
    CHECK(*loose <= *tight);
}

TEST_CASE("reduce_dimension identity, determinism, norm preservation") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(reduce_dimension(v, 4, 9) == v);
    CHECK(reduce_dimension(v, 2, 9) == reduce_dimension(v, 2, 9));
    CHECK(reduce_dimension(v, 2, 9) != reduce_dimension(v, 2, 10));
    CHECK_THROWS_AS(reduce_dimension(v, 0, 9), ValidationError);
    CHECK_THROWS_AS(reduce_dimension(v, 5, 9), ValidationError);

    // Johnson-Lindenstrauss style norm preservation in expectation.
    Rng rng(2718);
    const int big = 64, small = 16;
    const RandomProjection projection(big, small, 14);
    double mean_sq = 0.0;
    const int trials = 1000;
    for (int i = 0; i < trials; ++i) {
        std::vector<double> unit(big);
        double norm = 0.0;
        for (double& x : unit) {
            x = rng.normal();
            norm += x * x;
        }
        norm = std::sqrt(norm);
        for (double& x : unit) x /= norm;
        const auto projected = projection.apply(unit);
        double sq = 0.0;
        for (double x : projected) sq += x * x;
        mean_sq += sq;
    }
    mean_sq /= trials;
    CHECK(std::abs(mean_sq - 1.0) < 0.1);
}

TEST_CASE("project_pool keeps losses and labels") {
    const auto pool = small_pool();
    const RandomProjection projection(2, 1, 3);
    const auto projected = project_pool(pool, projection);
    REQUIRE(projected.size() == pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        CHECK(projected[i].context.features.size() == 1);
        CHECK(projected[i].dr_losses == pool[i].dr_losses);
        CHECK(projected[i].best_set == pool[i].best_set);
        CHECK(projected[i].context.class_label == pool[i].context.class_label);
    }
}

TEST_CASE("noiseless separable centers are linearly realizable for the baseline") {
    // Exact pool: one row per class center with the true expected losses.
    const SyntheticSpec spec = basis_spec();
    std::vector<ImputedContext> pool;
    for (const auto& cls : spec.classes) {
        ImputedContext entry;
        entry.context.features = cls.feature_center;
        entry.context.class_label = cls.label;
        entry.dr_losses = spec.expected_losses(cls.label);
        entry.best_set = spec.best_set(cls.label);
        pool.push_back(std::move(entry));
    }
    const auto baseline = fit_full_feedback(pool, 1e-9);
    for (const auto& entry : pool) {
        const ActionId chosen = baseline_action(baseline, entry.context);
        CHECK(std::find(entry.best_set.begin(), entry.best_set.end(), chosen.index) !=
              entry.best_set.end());
    }
}

TEST_CASE("regret against a true-optimal baseline never decreases") {
    const SyntheticSpec spec = basis_spec();
    std::vector<ImputedContext> pool_data;
    for (const auto& cls : spec.classes) {
        ImputedContext entry;
        entry.context.features = cls.feature_center;
        entry.context.class_label = cls.label;
        entry.context.item_id = cls.label;
        entry.dr_losses = spec.expected_losses(cls.label);
        entry.best_set = spec.best_set(cls.label);
        pool_data.push_back(std::move(entry));
    }
    auto pool = std::make_shared<const std::vector<ImputedContext>>(pool_data);
    const auto baseline = fit_full_feedback(pool_data, 1e-9);

    auto env = make_replay_environment(pool, 0.5, 99);
    PolicyState policy = init_policy({.d = 2, .k = 2, .lambda = 1.0});
    Rng rng(100);
    const Trace trace = run_protocol(*env, policy, Strategy::epsilon_greedy(0.4), 100, rng);
    const auto curve = cumulative_regret(trace, baseline, PoolCounterfactuals(pool));
    double previous = 0.0;
    for (const double r : curve.cumulative_regret) {
        CHECK(r >= previous - 1e-12);
        previous = r;
    }
}

namespace {

SweepScenario sweep_scenario(const SyntheticSpec& spec, Strategy::Kind kind, int rounds,
                             std::uint64_t base_seed) {
    SweepScenario scenario;
    scenario.make_env = [spec](const std::map<std::string, double>&, std::uint64_t env_seed) {
        return make_synthetic_environment(spec, env_seed);
    };
    scenario.base_hyper = {.d = spec.d, .k = spec.k, .lambda = 1.0};
    scenario.algorithm = kind;
    scenario.rounds = rounds;
    scenario.base_seed = base_seed;
    return scenario;
}

}  // namespace

TEST_CASE("one-cell one-seed sweep equals a direct run") {
    const SyntheticSpec spec = basis_spec();
    const auto scenario = sweep_scenario(spec, Strategy::Kind::greedy, 30, 99);
    const SweepGrid grid{{"lambda", {1.0}}};
    const auto report = run_sweep(scenario, grid, 1, 1);
    REQUIRE(report.cells.size() == 1);
    CHECK(report.cells[0].seeds_run == 1);
    CHECK(std::isnan(report.cells[0].ci95_loss));

    auto env = make_synthetic_environment(spec, derive_seed(99, 0));
    PolicyState policy = init_policy({.d = 2, .k = 2, .lambda = 1.0});
    Rng rng(derive_seed(99, 1));
    const Trace trace = run_protocol(*env, policy, Strategy::greedy(), 30, rng);
    CHECK(report.cells[0].mean_loss == trace.records.back().cumulative_loss);
}

TEST_CASE("sweep cells are independent of grid order and parallelism") {
    const SyntheticSpec spec = basis_spec();
    const auto scenario = sweep_scenario(spec, Strategy::Kind::epsilon_greedy, 40, 555);

    const SweepGrid forward{{"epsilon", {0.0, 0.1, 0.3}}, {"lambda", {1.0, 10.0}}};
    const SweepGrid backward{{"lambda", {10.0, 1.0}}, {"epsilon", {0.3, 0.1, 0.0}}};
    const auto serial = run_sweep(scenario, forward, 3, 1);
    const auto parallel = run_sweep(scenario, forward, 3, 4);
    const auto permuted = run_sweep(scenario, backward, 3, 2);

    REQUIRE(serial.cells.size() == 6);
    for (std::size_t i = 0; i < serial.cells.size(); ++i) {
        CHECK(serial.cells[i].mean_loss == parallel.cells[i].mean_loss);
        CHECK(serial.cells[i].std_loss == parallel.cells[i].std_loss);
    }
    for (const auto& cell : serial.cells) {
        bool found = false;
        for (const auto& other : permuted.cells) {
            if (other.params == cell.params) {
                found = true;
                CHECK(other.mean_loss == cell.mean_loss);
                CHECK(other.std_loss == cell.std_loss);
                CHECK(other.ci95_loss == doctest::Approx(cell.ci95_loss));
            }
        }
        CHECK(found);
    }
}

TEST_CASE("sweep reports failed cells without dropping them") {
    const SyntheticSpec spec = basis_spec();
    auto scenario = sweep_scenario(spec, Strategy::Kind::epsilon_greedy, 10, 1);
    const SweepGrid grid{{"epsilon", {0.1, 2.0}}};  // 2.0 is invalid
    const auto report = run_sweep(scenario, grid, 2, 1);
    REQUIRE(report.cells.size() == 2);
    CHECK(report.cells[0].error.empty());
    CHECK_FALSE(report.cells[1].error.empty());
    const auto best = report.argmin_cell();
    REQUIRE(best.has_value());
    CHECK(*best == 0);
}

TEST_CASE("sweep validates inputs") {
    const SyntheticSpec spec = basis_spec();
    const auto scenario = sweep_scenario(spec, Strategy::Kind::greedy, 10, 1);
    CHECK_THROWS_AS(run_sweep(scenario, {}, 1, 1), ValidationError);
    CHECK_THROWS_AS(run_sweep(scenario, {{"lambda", {}}}, 1, 1), ValidationError);
    CHECK_THROWS_AS(run_sweep(scenario, {{"lambda", {1.0}}}, 0, 1), ValidationError);
    // alpha on a non-linucb scenario fails per cell.
    const auto report = run_sweep(scenario, {{"alpha", {0.1}}}, 1, 1);
    CHECK_FALSE(report.cells[0].error.empty());
}
