#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "skewer/checkpoint.hpp"
#include "skewer/csv_io.hpp"
#include "skewer/dataset_io.hpp"
#include "skewer/environment.hpp"
#include "skewer/errors.hpp"
#include "skewer/rng.hpp"

using namespace skewer;

namespace {

// Unique temp dir per test binary run.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("skewer_io_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

PolicyState random_trained_policy(Rng& rng, int d, int k) {
    PolicyState policy = init_policy({.d = d, .k = k, .lambda = 0.5 + rng.uniform01() * 4.0});
    const int updates = 1 + rng.uniform_int(20);
    for (int t = 0; t < updates; ++t) {
        Context ctx;
        ctx.features.resize(d);
        for (double& f : ctx.features) f = rng.normal();
        learn(policy, ctx, ActionId{rng.uniform_int(k)}, rng.uniform01() < 0.5 ? 0.0 : 1.0,
              0.1 + 0.9 * rng.uniform01());
    }
    return policy;
}

bool policies_bit_identical(const PolicyState& a, const PolicyState& b) {
    if (a.hyper.d != b.hyper.d || a.hyper.k != b.hyper.k || a.hyper.lambda != b.hyper.lambda ||
        a.hyper.epsilon != b.hyper.epsilon || a.hyper.alpha != b.hyper.alpha ||
        a.rounds_learned != b.rounds_learned || a.arms.size() != b.arms.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.arms.size(); ++i) {
        if (a.arms[i].a_matrix() != b.arms[i].a_matrix()) return false;
        if (a.arms[i].b_vector() != b.arms[i].b_vector()) return false;
        if (a.arms[i].theta() != b.arms[i].theta()) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("dataset parse: empty file, one line, errors with line numbers") {
    TempDir tmp;
    const auto path = tmp.file("data.jsonl");

    spit(path, "");
    CHECK(parse_dataset(path).empty());

    spit(path, R"({"item_id":"b1","class_label":"banana","features":[0.5,1.5],)"
               R"("action":2,"loss":1,"propensity":0.16666666666666666})"
               "\n");
    const auto one = parse_dataset(path);
    REQUIRE(one.size() == 1);
    CHECK(one[0].item_id == "b1");
    CHECK(one[0].class_label == "banana");
    CHECK(one[0].features == std::vector<double>{0.5, 1.5});
    CHECK(one[0].logged_action == ActionId{2});
    CHECK(one[0].loss == 1.0);
    CHECK(one[0].propensity == doctest::Approx(1.0 / 6.0));

    spit(path, "{not json}\n");
    CHECK_THROWS_WITH_AS(parse_dataset(path), doctest::Contains(":1:"), IoError);

    spit(path, R"({"item_id":"a","class_label":"c","features":[1],"action":0,"loss":1,)"
               R"("propensity":0.5})"
               "\n"
               R"({"item_id":"a","class_label":"c","features":[1,2],"action":0,"loss":1,)"
               R"("propensity":0.5})"
               "\n");
    CHECK_THROWS_WITH_AS(parse_dataset(path), doctest::Contains(":2:"), IoError);

    spit(path, R"({"item_id":"a","class_label":"c","features":[1],"action":0,"loss":0.5,)"
               R"("propensity":0.5})"
               "\n");
    CHECK_THROWS_WITH_AS(parse_dataset(path), doctest::Contains("loss"), IoError);

    spit(path, R"({"item_id":"a","class_label":"c","features":[1],"action":0,"loss":1,)"
               R"("propensity":0.0})"
               "\n");
    CHECK_THROWS_WITH_AS(parse_dataset(path), doctest::Contains("propensity"), IoError);

    spit(path, R"({"class_label":"c","features":[1],"action":0,"loss":1,"propensity":0.5})"
               "\n");
    CHECK_THROWS_AS(parse_dataset(path), IoError);
}

TEST_CASE("dataset write/parse round-trip preserves every record") {
    TempDir tmp;
    SyntheticSpec spec;
    spec.d = 3;
    spec.k = 4;
    spec.classes = {{"apple", {0.2, 0.4, -1.0}, 0.3, {0.9, 0.4, 0.4, 0.1}},
                    {"grape", {-0.5, 1.0, 0.25}, 0.2, {0.3, 0.5, 0.2, 0.4}}};
    const auto dataset = generate_logged_dataset(spec, 200, 777);
    const auto path = tmp.file("roundtrip.jsonl");
    write_dataset(dataset, path);
    const auto parsed = parse_dataset(path);
    REQUIRE(parsed.size() == dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        CHECK(parsed[i].item_id == dataset[i].item_id);
        CHECK(parsed[i].class_label == dataset[i].class_label);
        CHECK(parsed[i].features == dataset[i].features);  // exact: shortest-round-trip JSON
        CHECK(parsed[i].logged_action == dataset[i].logged_action);
        CHECK(parsed[i].loss == dataset[i].loss);
        CHECK(parsed[i].propensity == dataset[i].propensity);
    }
}

TEST_CASE("pool write/parse round-trip") {
    TempDir tmp;
    SyntheticSpec spec;
    spec.d = 2;
    spec.k = 3;
    spec.classes = {{"apple", {1.0, 0.0}, 0.1, {0.8, 0.5, 0.2}},
                    {"grape", {0.0, 1.0}, 0.1, {0.2, 0.6, 0.4}}};
    const auto log = generate_logged_dataset(spec, 300, 31);
    const auto pool = impute_dr_losses(log, herding_estimate(log, 3));
    const auto path = tmp.file("pool.jsonl");
    write_pool(pool, path);
    const auto parsed = parse_pool(path);
    REQUIRE(parsed.size() == pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        CHECK(parsed[i].context.features == pool[i].context.features);
        CHECK(parsed[i].dr_losses == pool[i].dr_losses);
        CHECK(parsed[i].best_set == pool[i].best_set);
    }
}

TEST_CASE("checkpoint round-trip is bit-identical") {
    TempDir tmp;
    const auto path = tmp.file("policy.ckpt");

    PolicyState fresh = init_policy({.d = 3, .k = 6, .lambda = 100.0});
    save_checkpoint(fresh, "greedy", path);
    const auto loaded = load_checkpoint(path);
    CHECK(loaded.algorithm == "greedy");
    CHECK(policies_bit_identical(fresh, loaded.policy));

    Rng rng(6060);
    for (int trial = 0; trial < 25; ++trial) {
        const int d = 1 + rng.uniform_int(64);
        const int k = 1 + rng.uniform_int(8);
        PolicyState policy = random_trained_policy(rng, d, k);
        policy.hyper.epsilon = rng.uniform01() * 0.9;
        policy.hyper.alpha = rng.uniform01();
        save_checkpoint(policy, "linucb", path);
        const auto restored = load_checkpoint(path);
        CHECK(policies_bit_identical(policy, restored.policy));

        // Predictions continue identically after the round-trip.
        Context probe;
        probe.features.resize(d);
        for (double& f : probe.features) f = rng.normal();
        CHECK(predict_losses(policy, probe) == predict_losses(restored.policy, probe));
    }
}

TEST_CASE("checkpoint payload size formula") {
    CHECK(checkpoint_payload_size(2, 6) == 6u * (4u + 4u) * 8u);
    CHECK(checkpoint_payload_size(1, 1) == 24u);

    TempDir tmp;
    const auto path = tmp.file("sized.ckpt");
    const PolicyState policy = init_policy({.d = 5, .k = 3, .lambda = 2.0});
    save_checkpoint(policy, "greedy", path);
    const std::string blob = slurp(path);
    // magic + length + metadata + payload
    const std::size_t meta_len = blob.size() - 16 - checkpoint_payload_size(5, 3);
    CHECK(meta_len > 0);
    CHECK(blob.compare(0, 8, "CBCKPT01") == 0);
}

TEST_CASE("checkpoint corruption yields distinct error kinds") {
    TempDir tmp;
    const auto path = tmp.file("corrupt.ckpt");
    const PolicyState policy = init_policy({.d = 2, .k = 2, .lambda = 1.0});
    save_checkpoint(policy, "greedy", path);
    const std::string good = slurp(path);

    std::string bad_magic = good;
    bad_magic[0] = 'X';
    spit(path, bad_magic);
    CHECK_THROWS_AS(load_checkpoint(path), BadMagicError);

    spit(path, good.substr(0, good.size() - 10));
    CHECK_THROWS_AS(load_checkpoint(path), TruncatedCheckpointError);

    spit(path, good.substr(0, 10));
    CHECK_THROWS_AS(load_checkpoint(path), TruncatedCheckpointError);

    std::string wrong_version = good;
    const auto pos = wrong_version.find("\"format_version\":1");
    REQUIRE(pos != std::string::npos);
    wrong_version.replace(pos, 18, "\"format_version\":9");
    spit(path, wrong_version);
    CHECK_THROWS_AS(load_checkpoint(path), VersionMismatchError);

    spit(path, good + "zz");
    CHECK_THROWS_AS(load_checkpoint(path), IoError);

    spit(path, good);
    CHECK(policies_bit_identical(load_checkpoint(path).policy, policy));
}

TEST_CASE("trace CSV: header-only when empty, one row per round") {
    TempDir tmp;
    const auto path = tmp.file("trace.csv");

    Trace empty;
    write_trace_csv(empty, path);
    CHECK(slurp(path) == "t,item_id,class,action,propensity,loss,success,cumulative_loss\n");

    Trace trace;
    double cumulative = 0.0;
    for (int t = 1; t <= 3; ++t) {
        RoundRecord rec;
        rec.t = t;
        rec.item_id = "item-" + std::to_string(t);
        rec.class_label = "banana";
        rec.action = ActionId{t % 2};
        rec.propensity = 1.0 / 3.0;
        rec.loss = t == 2 ? 0.0 : 1.0;
        rec.success = rec.loss == 0.0;
        cumulative += rec.loss;
        rec.cumulative_loss = cumulative;
        trace.records.push_back(rec);
    }
    write_trace_csv(trace, path);
    const std::string text = slurp(path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);

    // Numeric fields parse back exactly.
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);  // header
    int row = 0;
    while (std::getline(lines, line)) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        REQUIRE(fields.size() == 8);
        double propensity = 0.0;
        std::from_chars(fields[4].data(), fields[4].data() + fields[4].size(), propensity);
        CHECK(propensity == trace.records[row].propensity);
        double cum = 0.0;
        std::from_chars(fields[7].data(), fields[7].data() + fields[7].size(), cum);
        CHECK(cum == trace.records[row].cumulative_loss);
        ++row;
    }
    CHECK(row == 3);
}

TEST_CASE("trace CSV includes per-arm score columns for linucb rounds") {
    TempDir tmp;
    Trace trace;
    RoundRecord rec;
    rec.t = 1;
    rec.item_id = "i";
    rec.class_label = "c";
    rec.action = ActionId{0};
    rec.arm_scores = {{0.25, 0.01}, {0.5, 0.02}};
    trace.records.push_back(rec);
    const auto path = tmp.file("ucb.csv");
    write_trace_csv(trace, path);
    const std::string text = slurp(path);
    CHECK(text.find("est_0,width_0,est_1,width_1") != std::string::npos);
    CHECK(text.find("0.25,0.01,0.5,0.02") != std::string::npos);
}

TEST_CASE("sweep CSV layout and empty CI for single seeds") {
    TempDir tmp;
    SweepReport report;
    report.param_names = {"epsilon"};
    SweepCell cell;
    cell.params["epsilon"] = 0.1;
    cell.seeds_run = 1;
    cell.mean_loss = 12.5;
    cell.std_loss = 0.0;
    cell.ci95_loss = std::numeric_limits<double>::quiet_NaN();
    report.cells.push_back(cell);

    const auto path = tmp.file("sweep.csv");
    write_sweep_csv(report, path);
    CHECK(slurp(path) == "epsilon,mean,std,ci95,seeds\n0.1,12.5,0,,1\n");

    report.cells[0].seeds_run = 4;
    report.cells[0].ci95_loss = 0.75;
    report.cells[0].has_regret = true;
    report.cells[0].mean_regret = 3.5;
    report.cells[0].std_regret = 1.0;
    report.cells[0].ci95_regret = 0.98;
    write_sweep_csv(report, path);
    CHECK(slurp(path) ==
          "epsilon,mean,std,ci95,seeds,regret_mean,regret_std,regret_ci95\n"
          "0.1,12.5,0,0.75,4,3.5,1,0.98\n");

    SweepCell failed;
    failed.params["epsilon"] = 0.2;
    failed.error = "boom";
    report.cells.push_back(failed);
    write_sweep_csv(report, path);
    const std::string text = slurp(path);
    CHECK(text.find("0.2,,,,0,,,") != std::string::npos);
}

TEST_CASE("unwritable paths raise IoError") {
    Trace trace;
    CHECK_THROWS_AS(write_trace_csv(trace, "/nonexistent-dir/trace.csv"), IoError);
    const PolicyState policy = init_policy({.d = 1, .k = 1, .lambda = 1.0});
    CHECK_THROWS_AS(save_checkpoint(policy, "greedy", "/nonexistent-dir/x.ckpt"), IoError);
}
