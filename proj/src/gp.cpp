#include "mvsr/gp.hpp"

#include <algorithm>
#include <cmath>

#include "mvsr/parallel.hpp"

namespace mvsr {
namespace {

constexpr int kRetryLimit = 16;

struct OperatorSets {
    std::vector<NodeKind> unary;
    std::vector<NodeKind> binary;
};

OperatorSets split_operators(const GpConfig& cfg) {
    OperatorSets sets;
    for (NodeKind k : cfg.operators) {
        auto& dest = is_binary(k) ? sets.binary : sets.unary;
        if (!is_leaf(k) && std::find(dest.begin(), dest.end(), k) == dest.end())
            dest.push_back(k);
    }
    return sets;
}

Expression random_leaf(const GpConfig& cfg, Rng& rng) {
    if (rng.bernoulli(0.5))
        return Expression::variable(static_cast<int>(rng.uniform_index(
            static_cast<std::uint64_t>(cfg.n_variables))));
    return Expression::constant(cfg.constant_init.sample(rng));
}

// Grow-style construction: below the budget/depth caps an operator is drawn
// with probability 3/4, uniformly over the enabled operator set.
Expression grow(const GpConfig& cfg, const OperatorSets& ops, int budget, int depth_left,
                Rng& rng) {
    std::size_t n_unary = (budget >= 2 && depth_left >= 2) ? ops.unary.size() : 0;
    std::size_t n_binary = (budget >= 3 && depth_left >= 2) ? ops.binary.size() : 0;
    if ((n_unary + n_binary) == 0 || !rng.bernoulli(0.75)) return random_leaf(cfg, rng);

    std::uint64_t pick = rng.uniform_index(n_unary + n_binary);
    if (pick < n_binary) {
        NodeKind op = ops.binary[pick];
        if (op == NodeKind::kPow) {
            // Keep exponents as plain tunable constants.
            Expression base = grow(cfg, ops, budget - 2, depth_left - 1, rng);
            return Expression::binary(op, std::move(base),
                                      Expression::constant(cfg.constant_init.sample(rng)));
        }
        int left_budget = 1 + static_cast<int>(rng.uniform_index(
                                  static_cast<std::uint64_t>(budget - 2)));
        Expression left = grow(cfg, ops, left_budget, depth_left - 1, rng);
        Expression right = grow(cfg, ops, budget - 1 - static_cast<int>(left.size()),
                                depth_left - 1, rng);
        return Expression::binary(op, std::move(left), std::move(right));
    }
    NodeKind op = ops.unary[pick - n_binary];
    return Expression::unary(op, grow(cfg, ops, budget - 1, depth_left - 1, rng));
}

bool within_limits(const Expression& e, const GpConfig& cfg) {
    return e.size() <= static_cast<std::size_t>(cfg.max_size) && e.depth() <= cfg.max_depth;
}

} // namespace

Expression random_tree(const GpConfig& cfg, int target_size, Rng& rng) {
    OperatorSets ops = split_operators(cfg);
    return grow(cfg, ops, std::max(1, target_size), cfg.max_depth, rng);
}

std::vector<Individual> init_population(const GpConfig& cfg, Rng& rng) {
    OperatorSets ops = split_operators(cfg);
    std::vector<Individual> pop;
    pop.reserve(static_cast<std::size_t>(cfg.population_size));
    for (int i = 0; i < cfg.population_size; ++i) {
        int target = 1 + static_cast<int>(rng.uniform_index(
                             static_cast<std::uint64_t>(cfg.max_size)));
        Expression e = grow(cfg, ops, target, cfg.max_depth, rng);
        Individual ind;
        ind.size = e.size();
        ind.depth = e.depth();
        ind.expr = std::move(e);
        pop.push_back(std::move(ind));
    }
    return pop;
}

std::size_t tournament_select(std::span<const Individual> pop, int pool_size, Rng& rng) {
    if (pop.empty()) throw std::invalid_argument("empty population");
    if (pool_size < 1) throw std::invalid_argument("pool size must be >= 1");
    std::size_t best = rng.uniform_index(pop.size());
    for (int i = 1; i < pool_size; ++i) {
        std::size_t cand = rng.uniform_index(pop.size());
        double cs = pop[cand].aggregated();
        double bs = pop[best].aggregated();
        if (cs < bs ||
            (cs == bs && (pop[cand].size < pop[best].size ||
                          (pop[cand].size == pop[best].size && cand < best)))) {
            best = cand;
        }
    }
    return best;
}

Expression crossover(const Expression& a, const Expression& b, const GpConfig& cfg, Rng& rng) {
    for (int attempt = 0; attempt < kRetryLimit; ++attempt) {
        std::size_t i = rng.uniform_index(a.size());
        std::size_t j = rng.uniform_index(b.size());
        Expression child = a.with_subtree(i, b.subtree(j));
        if (within_limits(child, cfg)) return child;
    }
    return a;
}

Expression mutate(const Expression& e, const GpConfig& cfg, Rng& rng) {
    if (!rng.bernoulli(cfg.mutation_probability)) return e;

    OperatorSets ops = split_operators(cfg);
    std::uint64_t kind = rng.uniform_index(4);

    switch (kind) {
        case 0: {  // operator swap, same arity
            std::vector<std::size_t> sites;
            for (std::size_t pos = 0; pos < e.size(); ++pos)
                if (!is_leaf(e.node(pos).kind)) sites.push_back(pos);
            if (sites.empty()) return e;
            std::size_t pos = sites[rng.uniform_index(sites.size())];
            const auto& pool = is_binary(e.node(pos).kind) ? ops.binary : ops.unary;
            if (pool.size() < 2) return e;
            NodeKind replacement;
            do {
                replacement = pool[rng.uniform_index(pool.size())];
            } while (replacement == e.node(pos).kind);
            std::vector<Node> nodes(e.nodes().begin(), e.nodes().end());
            nodes[pos].kind = replacement;
            Expression child = Expression::from_postorder(std::move(nodes));
            return within_limits(child, cfg) ? child : e;
        }
        case 1: {  // constant perturbation
            std::vector<std::size_t> sites;
            for (std::size_t pos = 0; pos < e.size(); ++pos)
                if (e.node(pos).kind == NodeKind::kConstant) sites.push_back(pos);
            if (sites.empty()) return e;
            std::size_t pos = sites[rng.uniform_index(sites.size())];
            double scaled = e.node(pos).value * rng.normal(1.0, 0.1);
            if (!std::isfinite(scaled)) return e;
            Expression child = e;
            child.set_constant(pos, scaled);
            return child;
        }
        case 2: {  // variable swap
            std::vector<std::size_t> sites;
            for (std::size_t pos = 0; pos < e.size(); ++pos)
                if (e.node(pos).kind == NodeKind::kVariable) sites.push_back(pos);
            if (sites.empty()) return e;
            std::size_t pos = sites[rng.uniform_index(sites.size())];
            std::vector<Node> nodes(e.nodes().begin(), e.nodes().end());
            nodes[pos].index = static_cast<std::int32_t>(
                rng.uniform_index(static_cast<std::uint64_t>(cfg.n_variables)));
            return Expression::from_postorder(std::move(nodes));
        }
        default: {  // subtree replacement
            for (int attempt = 0; attempt < kRetryLimit; ++attempt) {
                std::size_t pos = rng.uniform_index(e.size());
                std::size_t kept = e.size() - e.node(pos).length;
                int budget = std::max(1, cfg.max_size - static_cast<int>(kept));
                int target = 1 + static_cast<int>(rng.uniform_index(
                                     static_cast<std::uint64_t>(budget)));
                Expression child = e.with_subtree(pos, grow(cfg, ops, target, cfg.max_depth, rng));
                if (within_limits(child, cfg)) return child;
            }
            return e;
        }
    }
}

EvolveResult evolve(const GpConfig& cfg, const ViewSet& views, AggregationKind kind,
                    const EvolveOptions& opts) {
    if (views.k() == 0) throw std::invalid_argument("view set is empty");
    if (cfg.population_size < 2)
        throw std::invalid_argument("population must hold at least two individuals");
    if (cfg.evaluation_budget < static_cast<std::size_t>(cfg.population_size))
        throw std::invalid_argument("budget must cover at least one generation");

    GpConfig run_cfg = cfg;
    run_cfg.n_variables = static_cast<int>(views.dim());

    Rng rng_init(mix_seed(cfg.seed, 1));
    Rng rng_select(mix_seed(cfg.seed, 2));
    Rng rng_vary(mix_seed(cfg.seed, 3));

    MultiViewOptions mv_opts;
    mv_opts.lm = opts.lm;

    EvolveResult res;
    std::vector<Individual> pop = init_population(run_cfg, rng_init);

    auto evaluate_range = [&](std::vector<Individual>& group, std::size_t begin,
                              std::size_t count) {
        parallel_for(count, opts.threads, [&](std::size_t i) {
            Individual& ind = group[begin + i];
            if (!ind.eval) ind.eval = evaluate_multiview(ind.expr, views, kind, mv_opts);
        });
        res.evaluations_used += count;
    };

    std::size_t best = 0;
    auto update_best = [&]() {
        for (std::size_t i = 1; i < pop.size(); ++i) {
            double s = pop[i].aggregated();
            double bs = pop[best].aggregated();
            if (s < bs || (s == bs && pop[i].size < pop[best].size)) best = i;
        }
    };

    evaluate_range(pop, 0, pop.size());
    update_best();
    res.history.push_back(pop[best].aggregated());
    res.generations = 1;

    while (res.evaluations_used < cfg.evaluation_budget) {
        std::size_t room = cfg.evaluation_budget - res.evaluations_used;
        std::size_t offspring =
            std::min(room, static_cast<std::size_t>(cfg.population_size) - 1);

        std::vector<Individual> next;
        next.reserve(offspring + 1);
        next.push_back(pop[best]);  // elite, keeps its cached evaluation
        for (std::size_t i = 0; i < offspring; ++i) {
            const Individual& pa = pop[tournament_select(pop, cfg.pool_size, rng_select)];
            const Individual& pb = pop[tournament_select(pop, cfg.pool_size, rng_select)];
            Expression child = rng_vary.bernoulli(cfg.crossover_probability)
                                   ? crossover(pa.expr, pb.expr, run_cfg, rng_vary)
                                   : pa.expr;
            child = mutate(child, run_cfg, rng_vary);
            Individual ind;
            ind.size = child.size();
            ind.depth = child.depth();
            ind.expr = std::move(child);
            next.push_back(std::move(ind));
        }

        evaluate_range(next, 1, next.size() - 1);
        pop = std::move(next);
        best = 0;
        update_best();
        res.history.push_back(pop[best].aggregated());
        res.generations += 1;
    }

    // every individual in the final population carries its evaluation
    Individual& winner = pop[best];
    res.best_model = winner.eval->model;
    res.best_score = winner.eval->score;
    res.best_expression = winner.expr;
    return res;
}

} // namespace mvsr
