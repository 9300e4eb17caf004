#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mvsr/analysis.hpp"
#include "mvsr/datasets.hpp"
#include "mvsr/gp.hpp"
#include "mvsr/mveval.hpp"

namespace mvsr {

struct RunMode {
    enum class Kind { kMvsr, kSingleView, kAllSingleViews };
    Kind kind = Kind::kMvsr;
    int view_index = 0;

    std::string label() const {
        switch (kind) {
            case Kind::kMvsr: return "mvsr";
            case Kind::kSingleView: return "single_view_" + std::to_string(view_index);
            case Kind::kAllSingleViews: return "all_single_views";
        }
        return "?";
    }
};

struct ExperimentConfig {
    std::optional<BenchmarkId> benchmark;
    std::vector<std::string> csv_paths;
    double noise = 0.0;
    GpConfig gp;  // population, pool, probabilities, limits, budget, operators
    AggregationKind aggregation = AggregationKind::kMax;
    RunMode run_mode;
    std::vector<std::uint64_t> seeds = {1};
    std::string out_dir = "out";
    std::optional<int> param_bound_lower;  // advisory; echoed, not enforced
    std::optional<int> param_bound_upper;
    int search_iterations = 10;   // inner LM iterations during evolution
    int refit_iterations = 100;   // LM iterations for final scoring
    double lm_tolerance = 1e-10;
    int jobs = 1;
    std::optional<ViewThetas> view_thetas;
};

// Strict parse: unknown keys and malformed values raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

void validate(const ExperimentConfig& cfg);  // throws ConfigError

// Number of views the configuration will produce.
std::size_t view_count(const ExperimentConfig& cfg);

// One evolution + refit per (seed x expanded run mode); deterministic in the
// configuration. Validation and input loading happen before any run starts.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg);

struct SweepResult {
    std::vector<ResultRecord> records;
    std::vector<HeatmapCell> heatmap;
};

// Cross product of noise rates and maximum sizes over the base config.
SweepResult sweep(const ExperimentConfig& base, std::span<const double> noises,
                  std::span<const int> sizes);

// Flag-syntax helpers: comma lists for noise rates ("0,0.033,0.066,0.1"),
// comma lists or inclusive start:end:step ranges for sizes ("5:25:2").
std::vector<double> parse_noise_list(const std::string& text);
std::vector<int> parse_size_list(const std::string& text);

} // namespace mvsr
