#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "mvsr/datasets.hpp"
#include "mvsr/model.hpp"
#include "mvsr/optim.hpp"

namespace mvsr {

enum class AggregationKind { kMax, kAverage, kMedian, kMin, kHarmonicMean };

std::optional<AggregationKind> aggregation_from_string(std::string_view name);
std::string_view to_string(AggregationKind kind);

// The named statistic over per-view losses. Any non-finite input makes the
// result +infinity, whatever the kind.
double aggregate(std::span<const double> losses, AggregationKind kind);

struct MultiViewScore {
    double aggregated = std::numeric_limits<double>::infinity();
    std::vector<FitResult> per_view;
};

struct MultiViewOptions {
    LmOptions lm;
};

struct MultiViewEvaluation {
    MultiViewScore score;
    // Simplified, parameterized candidate; initial_guess holds the fitted
    // theta of the last view, the reportable starting point for later refits.
    ParametricModel model;
};

// Fits the candidate to every view independently (same promoted starting
// point for each, no chaining) and aggregates the per-view losses.
MultiViewEvaluation evaluate_multiview(const Expression& expr, const ViewSet& views,
                                       AggregationKind kind, const MultiViewOptions& opts = {});

} // namespace mvsr
