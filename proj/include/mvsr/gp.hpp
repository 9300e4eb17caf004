#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mvsr/datasets.hpp"
#include "mvsr/mveval.hpp"
#include "mvsr/rng.hpp"

namespace mvsr {

struct ConstantInit {
    enum class Kind { kNormal, kUniform };
    Kind kind = Kind::kNormal;
    double a = 0.0;  // mean / lower bound
    double b = 1.0;  // stddev / upper bound

    double sample(Rng& rng) const {
        return kind == Kind::kNormal ? rng.normal(a, b) : rng.uniform(a, b);
    }
};

struct GpConfig {
    int population_size = 1000;
    int pool_size = 5;
    double crossover_probability = 1.0;
    double mutation_probability = 0.25;
    int max_depth = 10;
    int max_size = 15;
    std::size_t evaluation_budget = 200000;
    std::vector<NodeKind> operators = {NodeKind::kAdd,    NodeKind::kSub,  NodeKind::kMul,
                                       NodeKind::kDiv,    NodeKind::kSquare, NodeKind::kExp,
                                       NodeKind::kSqrt};
    ConstantInit constant_init;
    int n_variables = 1;
    std::uint64_t seed = 0;
};

struct Individual {
    Expression expr;
    std::size_t size = 1;
    int depth = 1;
    std::optional<MultiViewEvaluation> eval;

    double aggregated() const {
        return eval ? eval->score.aggregated : std::numeric_limits<double>::infinity();
    }
};

// Random tree with size close to (and never above) target_size, depth capped
// by cfg.max_depth.
Expression random_tree(const GpConfig& cfg, int target_size, Rng& rng);

std::vector<Individual> init_population(const GpConfig& cfg, Rng& rng);

// Samples pool_size individuals uniformly with replacement; the winner has
// minimal aggregated score, ties broken by smaller size, then earlier index.
std::size_t tournament_select(std::span<const Individual> pop, int pool_size, Rng& rng);

// Swaps a uniformly chosen subtree of a copy of `a` with a uniformly chosen
// subtree of `b`. Offspring violating the size/depth limits are resampled up
// to 16 times, after which a copy of `a` is returned.
Expression crossover(const Expression& a, const Expression& b, const GpConfig& cfg, Rng& rng);

// With cfg.mutation_probability, applies one of: operator swap of the same
// arity, constant perturbation, variable swap, or subtree replacement;
// limit violations resampled as in crossover.
Expression mutate(const Expression& e, const GpConfig& cfg, Rng& rng);

struct EvolveOptions {
    LmOptions lm;     // inner fit settings used during search
    int threads = 1;  // parallelism for per-generation evaluation
};

struct EvolveResult {
    ParametricModel best_model;  // initial_guess = last-view theta of the best
    MultiViewScore best_score;
    Expression best_expression;  // raw (unsimplified) winning tree
    std::vector<double> history;  // best aggregated score per generation
    std::size_t evaluations_used = 0;
    int generations = 0;
};

// Generational loop with tournament selection, subtree crossover, mutation
// and one-elite preservation, stopping when the evaluation budget is spent.
EvolveResult evolve(const GpConfig& cfg, const ViewSet& views, AggregationKind kind,
                    const EvolveOptions& opts = {});

} // namespace mvsr
