#include "mvsr/mveval.hpp"

#include <algorithm>
#include <cmath>

namespace mvsr {

std::optional<AggregationKind> aggregation_from_string(std::string_view name) {
    if (name == "max") return AggregationKind::kMax;
    if (name == "average") return AggregationKind::kAverage;
    if (name == "median") return AggregationKind::kMedian;
    if (name == "min") return AggregationKind::kMin;
    if (name == "harmonic_mean") return AggregationKind::kHarmonicMean;
    return std::nullopt;
}

std::string_view to_string(AggregationKind kind) {
    switch (kind) {
        case AggregationKind::kMax: return "max";
        case AggregationKind::kAverage: return "average";
        case AggregationKind::kMedian: return "median";
        case AggregationKind::kMin: return "min";
        case AggregationKind::kHarmonicMean: return "harmonic_mean";
    }
    return "?";
}

double aggregate(std::span<const double> losses, AggregationKind kind) {
    if (losses.empty()) throw std::invalid_argument("cannot aggregate an empty list");
    for (double v : losses)
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();

    switch (kind) {
        case AggregationKind::kMax:
            return *std::max_element(losses.begin(), losses.end());
        case AggregationKind::kMin:
            return *std::min_element(losses.begin(), losses.end());
        case AggregationKind::kAverage: {
            double acc = 0.0;
            for (double v : losses) acc += v;
            return acc / static_cast<double>(losses.size());
        }
        case AggregationKind::kMedian: {
            std::vector<double> sorted(losses.begin(), losses.end());
            std::sort(sorted.begin(), sorted.end());
            std::size_t mid = sorted.size() / 2;
            return sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
        }
        case AggregationKind::kHarmonicMean: {
            double acc = 0.0;
            for (double v : losses) acc += 1.0 / v;
            return static_cast<double>(losses.size()) / acc;
        }
    }
    return std::numeric_limits<double>::infinity();
}

MultiViewEvaluation evaluate_multiview(const Expression& expr, const ViewSet& views,
                                       AggregationKind kind, const MultiViewOptions& opts) {
    if (views.k() == 0) throw std::invalid_argument("view set is empty");
    if (expr.max_variable_index() >= static_cast<int>(views.dim()))
        throw std::invalid_argument("expression dimensionality exceeds the views'");

    MultiViewEvaluation out;
    out.model = parameterize(expr);

    std::vector<double> losses;
    losses.reserve(views.k());
    for (const Dataset& view : views.views) {
        FitResult fit = lm_fit(out.model, view, out.model.initial_guess, opts.lm);
        losses.push_back(fit.loss);
        out.score.per_view.push_back(std::move(fit));
    }
    out.score.aggregated = aggregate(losses, kind);
    out.model.initial_guess = out.score.per_view.back().theta;
    return out;
}

} // namespace mvsr
