#include "mvsr/model.hpp"

#include <cmath>
#include <limits>

namespace mvsr {
namespace {

bool is_const_value(const Expression& e, double v) {
    return e.size() == 1 && e.node(0).kind == NodeKind::kConstant && e.node(0).value == v;
}

double apply_unary(NodeKind k, double a) {
    switch (k) {
        case NodeKind::kSquare: return a * a;
        case NodeKind::kExp: return std::exp(a);
        case NodeKind::kSqrt: return std::sqrt(a);
        case NodeKind::kSin: return std::sin(a);
        case NodeKind::kLog: return std::log(a);
        case NodeKind::kAbs: return std::fabs(a);
        case NodeKind::kNeg: return -a;
        default: return std::numeric_limits<double>::quiet_NaN();
    }
}

double apply_binary(NodeKind k, double a, double b) {
    switch (k) {
        case NodeKind::kAdd: return a + b;
        case NodeKind::kSub: return a - b;
        case NodeKind::kMul: return a * b;
        case NodeKind::kDiv: return a / b;
        case NodeKind::kPow: return std::pow(a, b);
        default: return std::numeric_limits<double>::quiet_NaN();
    }
}

Expression simplify_at(const Expression& e, std::size_t pos) {
    const Node& n = e.node(pos);
    if (is_leaf(n.kind)) return e.subtree(pos);

    if (is_unary(n.kind)) {
        Expression c = simplify_at(e, pos - 1);
        if (n.kind == NodeKind::kNeg && c.node(c.root()).kind == NodeKind::kNeg)
            return c.subtree(c.root() - 1);
        if (c.size() == 1 && c.node(0).kind == NodeKind::kConstant) {
            double v = apply_unary(n.kind, c.node(0).value);
            if (std::isfinite(v)) return Expression::constant(v);
        }
        return Expression::unary(n.kind, std::move(c));
    }

    std::size_t right_pos = pos - 1;
    std::size_t left_pos = right_pos - e.node(right_pos).length;
    Expression a = simplify_at(e, left_pos);
    Expression b = simplify_at(e, right_pos);

    bool a_const = a.size() == 1 && a.node(0).kind == NodeKind::kConstant;
    bool b_const = b.size() == 1 && b.node(0).kind == NodeKind::kConstant;
    if (a_const && b_const) {
        double v = apply_binary(n.kind, a.node(0).value, b.node(0).value);
        if (std::isfinite(v)) return Expression::constant(v);
    }

    switch (n.kind) {
        case NodeKind::kAdd:
            if (is_const_value(b, 0.0)) return a;
            if (is_const_value(a, 0.0)) return b;
            break;
        case NodeKind::kSub:
            if (is_const_value(b, 0.0)) return a;
            break;
        case NodeKind::kMul:
            if (is_const_value(b, 1.0)) return a;
            if (is_const_value(a, 1.0)) return b;
            break;
        case NodeKind::kDiv:
            if (is_const_value(b, 1.0)) return a;
            break;
        default:
            break;
    }
    return Expression::binary(n.kind, std::move(a), std::move(b));
}

} // namespace

Expression simplify(const Expression& expr) {
    Expression current = simplify_at(expr, expr.root());
    for (;;) {
        Expression next = simplify_at(current, current.root());
        if (next == current) return current;
        current = std::move(next);
    }
}

ParametricModel parameterize(const Expression& expr) {
    if (expr.max_parameter_index() >= 0)
        throw std::invalid_argument("expression already contains parameters");
    Expression simplified = simplify(expr);

    std::vector<Node> nodes(simplified.nodes().begin(), simplified.nodes().end());
    std::vector<double> guess;
    for (Node& n : nodes) {
        if (n.kind == NodeKind::kConstant && n.value != 1.0) {
            n.kind = NodeKind::kParameter;
            n.index = static_cast<std::int32_t>(guess.size());
            guess.push_back(n.value);
            n.value = 0.0;
        }
    }
    return ParametricModel{Expression::from_postorder(std::move(nodes)), std::move(guess)};
}

Expression instantiate(const ParametricModel& model, std::span<const double> theta) {
    if (static_cast<int>(theta.size()) != model.n_params())
        throw std::invalid_argument("theta length does not match parameter count");
    for (double v : theta)
        if (!std::isfinite(v)) throw std::invalid_argument("theta entries must be finite");

    std::vector<Node> nodes(model.skeleton.nodes().begin(), model.skeleton.nodes().end());
    for (Node& n : nodes) {
        if (n.kind == NodeKind::kParameter) {
            n.kind = NodeKind::kConstant;
            n.value = theta[static_cast<std::size_t>(n.index)];
            n.index = 0;
        }
    }
    return Expression::from_postorder(std::move(nodes));
}

ParametricModel skeleton_model(Expression skeleton,
                               std::optional<std::vector<double>> initial_guess) {
    int n = skeleton.max_parameter_index() + 1;
    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    for (const Node& node : skeleton.nodes())
        if (node.kind == NodeKind::kParameter) ++seen[static_cast<std::size_t>(node.index)];
    for (int c : seen)
        if (c != 1)
            throw std::invalid_argument("parameter indices must be 0..n-1, each used once");

    std::vector<double> guess;
    if (initial_guess) {
        guess = std::move(*initial_guess);
        if (static_cast<int>(guess.size()) != n)
            throw std::invalid_argument("initial guess length does not match parameter count");
        for (double v : guess)
            if (!std::isfinite(v)) throw std::invalid_argument("initial guess must be finite");
    } else {
        guess.assign(static_cast<std::size_t>(n), 1.0);
    }
    return ParametricModel{std::move(skeleton), std::move(guess)};
}

InstantiatedModel::InstantiatedModel(const ParametricModel& model, std::span<const double> theta)
    : expr_(instantiate(model, theta)),
      positions_(static_cast<std::size_t>(model.n_params()), 0) {
    std::size_t pos = 0;
    for (const Node& n : model.skeleton.nodes()) {
        if (n.kind == NodeKind::kParameter) positions_[static_cast<std::size_t>(n.index)] = pos;
        ++pos;
    }
}

void InstantiatedModel::set_theta(std::span<const double> theta) {
    if (theta.size() != positions_.size())
        throw std::invalid_argument("theta length does not match parameter count");
    for (std::size_t j = 0; j < theta.size(); ++j) expr_.set_constant(positions_[j], theta[j]);
}

} // namespace mvsr
