#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mvsr/expr.hpp"

namespace mvsr {

// A skeleton expression whose free constants have been promoted to
// parameters p0..p{n-1}, plus the promoted values as the initial guess.
struct ParametricModel {
    Expression skeleton;
    std::vector<double> initial_guess;

    int n_params() const { return static_cast<int>(initial_guess.size()); }
};

// Fixed rewrite set applied to fixpoint: constant folding of all-constant
// subtrees (skipped when the folded value is not finite, preserving NaN
// semantics), the neutral-element identities x+0, x-0, x*1, x/1, and double
// negation. Not a computer algebra system; just enough that the surviving
// constants are the meaningful degrees of freedom.
Expression simplify(const Expression& expr);

// Promotes each Constant leaf, in left-to-right order, to Parameter(j) with
// initial_guess[j] equal to the constant's value. Literal 1.0 stays literal:
// it shows up structurally (e.g. as the numerator of a reciprocal), not as a
// tunable coefficient. Re-simplifies its input first.
ParametricModel parameterize(const Expression& expr);

// Substitutes theta[j] for Parameter(j). Throws on length mismatch or
// non-finite entries.
Expression instantiate(const ParametricModel& model, std::span<const double> theta);

// Builds a model from a skeleton that already contains Parameter leaves
// (e.g. parsed from text). Indices must be 0..n-1, each used exactly once.
// Without an explicit guess, all parameters start at 1.
ParametricModel skeleton_model(Expression skeleton,
                               std::optional<std::vector<double>> initial_guess = std::nullopt);

// Re-instantiable expression for iterative fitting: writes successive theta
// values into the parameter slots without rebuilding the tree.
class InstantiatedModel {
public:
    InstantiatedModel(const ParametricModel& model, std::span<const double> theta);

    void set_theta(std::span<const double> theta);
    const Expression& expression() const noexcept { return expr_; }
    // theta_positions()[j] is the flat node position holding parameter j.
    std::span<const std::size_t> theta_positions() const noexcept { return positions_; }

private:
    Expression expr_;
    std::vector<std::size_t> positions_;
};

} // namespace mvsr
