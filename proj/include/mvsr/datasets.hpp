#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvsr/expr.hpp"
#include "mvsr/model.hpp"
#include "mvsr/rng.hpp"

namespace mvsr {

struct Dataset {
    RowMatrix X;
    std::vector<double> y;
    std::string label;

    std::size_t rows() const { return X.rows; }
    std::size_t dim() const { return X.cols; }
};

struct NoiseSpec {
    double rate = 0.0;  // tau in [0, 1)
    std::uint64_t seed = 0;
};

// Where a view set came from; keeps the noiseless targets around so models
// can later be scored against them regardless of the noise realization used
// during search.
struct Provenance {
    std::string generator = "external";
    double noise_rate = 0.0;
    std::uint64_t seed = 0;
    int true_n_params = -1;  // -1 when unknown
    std::vector<std::vector<double>> true_thetas;
    std::vector<std::vector<double>> noiseless_y;  // scaled, one per view
};

struct ViewSet {
    std::vector<Dataset> views;
    Provenance provenance;

    std::size_t k() const { return views.size(); }
    std::size_t dim() const { return views.empty() ? 0 : views.front().dim(); }
};

enum class BenchmarkId { kF1Views, kF1Partial, kF2Views, kF3Views };

std::optional<BenchmarkId> benchmark_from_string(std::string_view name);
std::string_view to_string(BenchmarkId id);

using ViewThetas = std::array<std::array<double, 4>, 4>;

// Per-view parameter values for the generating functions; two entries per
// view are zeroed in a rotating pattern so that no single view exposes the
// full functional form.
ViewThetas default_view_thetas(BenchmarkId id);

// Benchmark construction: per view, draw/space the inputs, evaluate the
// generating function, add noise, then rescale the target to max |y| = 10.
// Deterministic in (id, noise, seed).
ViewSet generate_benchmark(BenchmarkId id, const NoiseSpec& noise, std::uint64_t seed);
ViewSet generate_benchmark(BenchmarkId id, const NoiseSpec& noise, std::uint64_t seed,
                           const ViewThetas& thetas);

// The generating function as a parametric skeleton (target scaling folded in
// for f2/f3, where it is a genuine extra degree of freedom).
ParametricModel true_model(BenchmarkId id);
int true_param_count(BenchmarkId id);  // 4, 4, 5, 5

// y_i + N(0, sigma_y * sqrt(tau / (1 - tau))) per entry, sigma_y the
// population standard deviation of y. tau = 0 returns the input unchanged.
std::vector<double> add_noise(std::span<const double> y, const NoiseSpec& spec, Rng& rng);

// y -> 10 * y / max|y|; throws on an all-zero target.
std::vector<double> scale_target(std::span<const double> y);

// CSV contract: UTF-8, comma separated, first line is a header of feature
// columns x0..x{m-1} in order plus one target column named y.
Dataset load_csv(const std::filesystem::path& path);
void write_csv(const Dataset& data, const std::filesystem::path& path);

ViewSet viewset_from_csv(std::span<const std::string> paths);
ViewSet sub_viewset(const ViewSet& vs, std::size_t view_index);

} // namespace mvsr
