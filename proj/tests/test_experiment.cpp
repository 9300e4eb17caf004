#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mvsr/errors.hpp"
#include "mvsr/experiment.hpp"
#include "test_support.hpp"

using namespace mvsr;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.benchmark = BenchmarkId::kF1Views;
    cfg.gp.population_size = 16;
    cfg.gp.evaluation_budget = 64;
    cfg.gp.max_size = 7;
    cfg.seeds = {1, 2};
    cfg.search_iterations = 3;
    cfg.refit_iterations = 20;
    return cfg;
}

} // namespace

TEST_CASE("parse_config: fields, defaults, strictness") {
    auto cfg = parse_config(R"({
        "benchmark": "f1_partial",
        "noise": 0.1,
        "max_size": 11,
        "population_size": 50,
        "pool_size": 3,
        "operators": ["add", "mul", "sin"],
        "aggregation": "median",
        "run_mode": "single_view",
        "view_index": 2,
        "seeds": [4, 5, 6],
        "param_bounds": {"lower": 1, "upper": 9},
        "jobs": 2
    })");
    CHECK(cfg.benchmark == BenchmarkId::kF1Partial);
    CHECK(cfg.noise == 0.1);
    CHECK(cfg.gp.max_size == 11);
    CHECK(cfg.gp.population_size == 50);
    CHECK(cfg.gp.pool_size == 3);
    CHECK(cfg.gp.operators ==
          std::vector<NodeKind>{NodeKind::kAdd, NodeKind::kMul, NodeKind::kSin});
    CHECK(cfg.aggregation == AggregationKind::kMedian);
    CHECK(cfg.run_mode.kind == RunMode::Kind::kSingleView);
    CHECK(cfg.run_mode.view_index == 2);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{4, 5, 6});
    CHECK(cfg.param_bound_lower == 1);
    CHECK(cfg.param_bound_upper == 9);
    CHECK(cfg.jobs == 2);
    // untouched defaults
    CHECK(cfg.gp.crossover_probability == 1.0);
    CHECK(cfg.gp.mutation_probability == 0.25);
    CHECK(cfg.gp.max_depth == 10);

    CHECK_THROWS_AS(parse_config("{\"populaton_size\": 10}"), ConfigError);
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"benchmark": "f9"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"operators": ["cos"]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"run_mode": "pairs"})"), ConfigError);
}

TEST_CASE("validate catches bad configurations") {
    auto ok = tiny_config();
    CHECK_NOTHROW(validate(ok));

    auto both = ok;
    both.csv_paths = {"a.csv"};
    CHECK_THROWS_AS(validate(both), ConfigError);

    auto neither = ok;
    neither.benchmark.reset();
    CHECK_THROWS_AS(validate(neither), ConfigError);

    auto noise = ok;
    noise.noise = 1.0;
    CHECK_THROWS_AS(validate(noise), ConfigError);

    auto seeds = ok;
    seeds.seeds.clear();
    CHECK_THROWS_AS(validate(seeds), ConfigError);

    auto budget = ok;
    budget.gp.evaluation_budget = 5;
    CHECK_THROWS_AS(validate(budget), ConfigError);

    auto view = ok;
    view.run_mode = {RunMode::Kind::kSingleView, 4};
    CHECK_THROWS_AS(validate(view), ConfigError);

    auto bounds = ok;
    bounds.param_bound_lower = 5;
    bounds.param_bound_upper = 5;
    CHECK_THROWS_AS(validate(bounds), ConfigError);

    auto ops = ok;
    ops.gp.operators.clear();
    CHECK_THROWS_AS(validate(ops), ConfigError);
}

TEST_CASE("run_experiment: record counts and determinism") {
    auto cfg = tiny_config();
    cfg.run_mode.kind = RunMode::Kind::kAllSingleViews;
    auto records = run_experiment(cfg);
    REQUIRE(records.size() == 8);  // 2 seeds x 4 views

    for (const auto& r : records) {
        CHECK(r.function == "f1_views");
        CHECK(r.run_mode.substr(0, 12) == "single_view_");
        CHECK(r.max_size == 7);
        CHECK_NOTHROW(parse(r.expression));
    }

    auto again = run_experiment(cfg);
    REQUIRE(again.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(again[i].expression == records[i].expression);
        CHECK(again[i].refit_mse == records[i].refit_mse);
        CHECK(again[i].n_params == records[i].n_params);
    }
}

TEST_CASE("run_experiment is schedule-independent") {
    auto cfg = tiny_config();
    cfg.jobs = 1;
    auto serial = run_experiment(cfg);
    cfg.jobs = 4;
    auto parallel = run_experiment(cfg);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].expression == parallel[i].expression);
        CHECK(serial[i].refit_mse == parallel[i].refit_mse);
    }
}

TEST_CASE("missing csv paths abort before any run") {
    ExperimentConfig cfg = tiny_config();
    cfg.benchmark.reset();
    cfg.csv_paths = {"/nonexistent/view.csv"};
    CHECK_THROWS_AS(run_experiment(cfg), IoError);
}

TEST_CASE("csv-backed experiments run end to end") {
    auto dir = fs::temp_directory_path() / "mvsr_test_experiment";
    fs::create_directories(dir);
    ViewSet vs = testing::linear_views({2.0, -1.0});
    std::vector<std::string> paths;
    for (std::size_t i = 0; i < vs.k(); ++i) {
        auto p = dir / ("v" + std::to_string(i) + ".csv");
        write_csv(vs.views[i], p);
        paths.push_back(p.string());
    }

    ExperimentConfig cfg = tiny_config();
    cfg.benchmark.reset();
    cfg.csv_paths = paths;
    cfg.seeds = {1};
    auto records = run_experiment(cfg);
    REQUIRE(records.size() == 1);
    CHECK(records[0].function == "external");
    CHECK(std::isfinite(records[0].refit_mse));
}

TEST_CASE("sweep produces the full grid and its heatmap") {
    auto cfg = tiny_config();
    cfg.seeds = {1, 2, 3};
    std::vector<double> noises{0.0, 0.1};
    std::vector<int> sizes{5, 7};
    auto result = sweep(cfg, noises, sizes);
    CHECK(result.records.size() == 12);  // 2 x 2 x 3, mvsr only
    CHECK(result.heatmap.size() == 4);
    for (const auto& cell : result.heatmap) CHECK(cell.count == 3);
}
