#include "mvsr/expr.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "mvsr/num_io.hpp"

namespace mvsr {

std::string_view node_name(NodeKind k) {
    switch (k) {
        case NodeKind::kConstant: return "const";
        case NodeKind::kVariable: return "var";
        case NodeKind::kParameter: return "param";
        case NodeKind::kAdd: return "add";
        case NodeKind::kSub: return "sub";
        case NodeKind::kMul: return "mul";
        case NodeKind::kDiv: return "div";
        case NodeKind::kPow: return "pow";
        case NodeKind::kSquare: return "square";
        case NodeKind::kExp: return "exp";
        case NodeKind::kSqrt: return "sqrt";
        case NodeKind::kSin: return "sin";
        case NodeKind::kLog: return "log";
        case NodeKind::kAbs: return "abs";
        case NodeKind::kNeg: return "neg";
    }
    return "?";
}

Expression::Expression() : nodes_{Node{}} {}

Expression Expression::constant(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("constant must be finite");
    Node n;
    n.kind = NodeKind::kConstant;
    n.value = value;
    return Expression({n});
}

Expression Expression::variable(int index) {
    if (index < 0) throw std::invalid_argument("variable index must be >= 0");
    Node n;
    n.kind = NodeKind::kVariable;
    n.index = index;
    return Expression({n});
}

Expression Expression::parameter(int index) {
    if (index < 0) throw std::invalid_argument("parameter index must be >= 0");
    Node n;
    n.kind = NodeKind::kParameter;
    n.index = index;
    return Expression({n});
}

Expression Expression::unary(NodeKind op, Expression operand) {
    if (!is_unary(op)) throw std::invalid_argument("not a unary operator");
    // Negation of a literal is the negated literal; keeps formatting and
    // parsing mutually inverse (the grammar has no signed number token).
    if (op == NodeKind::kNeg && operand.size() == 1 &&
        operand.nodes_[0].kind == NodeKind::kConstant) {
        return constant(-operand.nodes_[0].value);
    }
    std::vector<Node> nodes = std::move(operand.nodes_);
    Node n;
    n.kind = op;
    n.length = static_cast<std::uint32_t>(nodes.size() + 1);
    nodes.push_back(n);
    return Expression(std::move(nodes));
}

Expression Expression::binary(NodeKind op, Expression left, Expression right) {
    if (!is_binary(op)) throw std::invalid_argument("not a binary operator");
    std::vector<Node> nodes = std::move(left.nodes_);
    nodes.insert(nodes.end(), right.nodes_.begin(), right.nodes_.end());
    Node n;
    n.kind = op;
    n.length = static_cast<std::uint32_t>(nodes.size() + 1);
    nodes.push_back(n);
    return Expression(std::move(nodes));
}

Expression Expression::from_postorder(std::vector<Node> nodes) {
    if (nodes.empty()) throw std::invalid_argument("empty node list");
    // Recompute lengths with a running stack; validates that the array is a
    // single well-formed postorder tree.
    std::vector<std::uint32_t> stack;
    stack.reserve(nodes.size());
    for (auto& n : nodes) {
        switch (arity(n.kind)) {
            case 0:
                n.length = 1;
                if (n.kind == NodeKind::kConstant && !std::isfinite(n.value))
                    throw std::invalid_argument("constant must be finite");
                break;
            case 1: {
                if (stack.empty()) throw std::invalid_argument("malformed postorder array");
                n.length = stack.back() + 1;
                stack.pop_back();
                break;
            }
            default: {
                if (stack.size() < 2) throw std::invalid_argument("malformed postorder array");
                std::uint32_t r = stack.back();
                stack.pop_back();
                std::uint32_t l = stack.back();
                stack.pop_back();
                n.length = l + r + 1;
                break;
            }
        }
        stack.push_back(n.length);
    }
    if (stack.size() != 1 || stack.back() != nodes.size())
        throw std::invalid_argument("malformed postorder array");
    return Expression(std::move(nodes));
}

int Expression::depth() const noexcept {
    // Postorder walk with a depth stack; leaves push 1, operators fold.
    thread_local std::vector<int> stack;
    stack.clear();
    for (const auto& n : nodes_) {
        switch (arity(n.kind)) {
            case 0:
                stack.push_back(1);
                break;
            case 1:
                stack.back() += 1;
                break;
            default: {
                int r = stack.back();
                stack.pop_back();
                stack.back() = std::max(stack.back(), r) + 1;
            }
        }
    }
    return stack.back();
}

int Expression::max_variable_index() const noexcept {
    int m = -1;
    for (const auto& n : nodes_)
        if (n.kind == NodeKind::kVariable) m = std::max(m, static_cast<int>(n.index));
    return m;
}

int Expression::max_parameter_index() const noexcept {
    int m = -1;
    for (const auto& n : nodes_)
        if (n.kind == NodeKind::kParameter) m = std::max(m, static_cast<int>(n.index));
    return m;
}

std::size_t Expression::count(NodeKind kind) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [&](const Node& n) { return n.kind == kind; }));
}

Expression Expression::subtree(std::size_t pos) const {
    std::size_t begin = subtree_begin(pos);
    return Expression(std::vector<Node>(nodes_.begin() + begin, nodes_.begin() + pos + 1));
}

Expression Expression::with_subtree(std::size_t pos, const Expression& replacement) const {
    std::size_t begin = subtree_begin(pos);
    std::vector<Node> out;
    out.reserve(nodes_.size() - nodes_[pos].length + replacement.size());
    out.insert(out.end(), nodes_.begin(), nodes_.begin() + begin);
    out.insert(out.end(), replacement.nodes_.begin(), replacement.nodes_.end());
    out.insert(out.end(), nodes_.begin() + pos + 1, nodes_.end());
    return from_postorder(std::move(out));
}

void Expression::set_constant(std::size_t pos, double value) {
    if (nodes_[pos].kind != NodeKind::kConstant)
        throw std::invalid_argument("node is not a constant");
    if (!std::isfinite(value)) throw std::invalid_argument("constant must be finite");
    nodes_[pos].value = value;
}

bool operator==(const Expression& a, const Expression& b) {
    if (a.nodes_.size() != b.nodes_.size()) return false;
    for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
        const Node& x = a.nodes_[i];
        const Node& y = b.nodes_[i];
        if (x.kind != y.kind || x.index != y.index) return false;
        if (x.kind == NodeKind::kConstant &&
            std::bit_cast<std::uint64_t>(x.value) != std::bit_cast<std::uint64_t>(y.value))
            return false;
    }
    return true;
}

SizeDepth size_and_depth(const Expression& expr) { return {expr.size(), expr.depth()}; }

namespace {

void format_rec(const Expression& e, std::size_t pos, std::string& out) {
    const Node& n = e.node(pos);
    switch (n.kind) {
        case NodeKind::kConstant:
            out += format_literal(n.value);
            return;
        case NodeKind::kVariable:
            out += 'x';
            out += std::to_string(n.index);
            return;
        case NodeKind::kParameter:
            out += 'p';
            out += std::to_string(n.index);
            return;
        default:
            break;
    }
    if (is_binary(n.kind)) {
        std::size_t right = pos - 1;
        std::size_t left = right - e.node(right).length;
        if (n.kind == NodeKind::kPow) {
            out += "pow(";
            format_rec(e, left, out);
            out += ", ";
            format_rec(e, right, out);
            out += ')';
            return;
        }
        const char* op = n.kind == NodeKind::kAdd   ? " + "
                         : n.kind == NodeKind::kSub ? " - "
                         : n.kind == NodeKind::kMul ? " * "
                                                    : " / ";
        out += '(';
        format_rec(e, left, out);
        out += op;
        format_rec(e, right, out);
        out += ')';
        return;
    }
    if (n.kind == NodeKind::kNeg) {
        out += "(-";
        format_rec(e, pos - 1, out);
        out += ')';
        return;
    }
    out += node_name(n.kind);
    out += '(';
    format_rec(e, pos - 1, out);
    out += ')';
}

} // namespace

std::string format(const Expression& expr) {
    std::string out;
    out.reserve(expr.size() * 8);
    format_rec(expr, expr.root(), out);
    return out;
}

} // namespace mvsr
