#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mvsr/datasets.hpp"
#include "mvsr/model.hpp"
#include "mvsr/optim.hpp"

namespace mvsr {

struct ResultRecord {
    std::string function;  // benchmark id or "external"
    std::string run_mode;  // "mvsr" or "single_view_<i>"
    double noise = 0.0;
    int max_size = 0;
    std::uint64_t seed = 0;
    int n_params = 0;
    double refit_mse = std::numeric_limits<double>::infinity();
    std::string expression;  // skeleton text
    double wall_time_seconds = 0.0;  // informational; not serialized
};

// Refits the skeleton to the noiseless targets of every view (LM from the
// model's stored guess) and averages the per-view MSEs; any non-finite loss
// makes the score +infinity.
double refit_score(const ParametricModel& model, const ViewSet& views,
                   const LmOptions& opts = {});

struct HeatmapCell {
    std::string run_mode;
    double noise = 0.0;
    int max_size = 0;
    double mean_clipped_mse = 0.0;
    int count = 0;
};

// Groups records by (run_mode, noise, max_size) and averages min(score, 5),
// with +infinity clipped to 5.
std::vector<HeatmapCell> heatmap_grid(std::span<const ResultRecord> records);

inline int param_delta(int n_model, int n_true) { return std::abs(n_model - n_true); }

struct RankTable {
    std::vector<std::string> methods;
    std::vector<std::vector<double>> deltas;  // methods x instances
    std::vector<double> average_rank;         // one per method
    double friedman_chi2 = 0.0;
    std::size_t n_instances = 0;
};

// Mid-rank average ranks per method (smaller delta ranks better) plus the
// Friedman chi-squared statistic over the instances.
RankTable average_ranks(const std::vector<std::string>& methods,
                        const std::vector<std::vector<double>>& deltas);

// results.csv: function,run_mode,noise,max_size,seed,n_params,refit_mse,expression
void write_results_csv(const std::filesystem::path& path, std::span<const ResultRecord> records);
std::vector<ResultRecord> read_results_csv(const std::filesystem::path& path);

// heatmap.csv: run_mode,noise,max_size,mean_clipped_mse,count
void write_heatmap_csv(const std::filesystem::path& path, std::span<const HeatmapCell> cells);

// Canonical record ordering used for all emitted files.
void sort_records(std::vector<ResultRecord>& records);

} // namespace mvsr
