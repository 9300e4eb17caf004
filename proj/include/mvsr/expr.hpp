#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mvsr {

enum class NodeKind : std::uint8_t {
    // leaves
    kConstant,
    kVariable,
    kParameter,
    // binary operators
    kAdd,
    kSub,
    kMul,
    kDiv,
    kPow,
    // unary operators
    kSquare,
    kExp,
    kSqrt,
    kSin,
    kLog,
    kAbs,
    kNeg,
};

constexpr bool is_leaf(NodeKind k) { return k <= NodeKind::kParameter; }
constexpr bool is_binary(NodeKind k) { return k >= NodeKind::kAdd && k <= NodeKind::kPow; }
constexpr bool is_unary(NodeKind k) { return k >= NodeKind::kSquare; }
constexpr int arity(NodeKind k) { return is_leaf(k) ? 0 : (is_binary(k) ? 2 : 1); }

std::string_view node_name(NodeKind k);

struct Node {
    double value = 0.0;        // constant payload
    std::int32_t index = 0;    // variable / parameter id
    std::uint32_t length = 1;  // node count of the subtree rooted here
    NodeKind kind = NodeKind::kConstant;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t offset)
        : std::runtime_error(message + " (offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Immutable operator tree stored as a postorder node array: children precede
// their parent, the root is the last node. Subtrees are contiguous ranges,
// which makes structural surgery (crossover, mutation) a splice.
class Expression {
public:
    Expression();  // constant 0.0

    static Expression constant(double value);
    static Expression variable(int index);
    static Expression parameter(int index);
    static Expression unary(NodeKind op, Expression operand);
    static Expression binary(NodeKind op, Expression left, Expression right);
    // Adopts a postorder array; recomputes subtree lengths and validates shape.
    static Expression from_postorder(std::vector<Node> nodes);

    std::span<const Node> nodes() const noexcept { return nodes_; }
    const Node& node(std::size_t pos) const { return nodes_[pos]; }
    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t root() const noexcept { return nodes_.size() - 1; }
    std::size_t subtree_begin(std::size_t pos) const { return pos + 1 - nodes_[pos].length; }

    int depth() const noexcept;
    int max_variable_index() const noexcept;   // -1 when no variables
    int max_parameter_index() const noexcept;  // -1 when no parameters
    std::size_t count(NodeKind kind) const noexcept;

    Expression subtree(std::size_t pos) const;
    // New expression with the subtree rooted at pos replaced.
    Expression with_subtree(std::size_t pos, const Expression& replacement) const;

    // In-place update of a constant leaf; value must stay finite.
    void set_constant(std::size_t pos, double value);

    friend bool operator==(const Expression& a, const Expression& b);

private:
    explicit Expression(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}
    std::vector<Node> nodes_;
};

Expression parse(std::string_view text);
std::string format(const Expression& expr);

struct SizeDepth {
    std::size_t size;
    int depth;
};
SizeDepth size_and_depth(const Expression& expr);

// Row-major p x m table of inputs.
struct RowMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    RowMatrix() = default;
    RowMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
};

// Pointwise evaluation over all rows of X. Domain violations (sqrt of a
// negative, log of a non-positive, division by zero, ...) produce non-finite
// entries and never throw; a variable index >= X.cols does throw.
std::vector<double> evaluate(const Expression& expr, const RowMatrix& X);

// Jacobian of the output with respect to the Constant leaves, enumerated in
// left-to-right order; forward-mode accumulation alongside the value pass.
RowMatrix grad_constants(const Expression& expr, const RowMatrix& X);

// Shared engine: derivative columns follow `seeds`, which lists positions of
// Constant leaves to differentiate against. Returns predictions through `values`.
RowMatrix evaluate_with_gradient(const Expression& expr, const RowMatrix& X,
                                 std::span<const std::size_t> seeds,
                                 std::vector<double>& values);

} // namespace mvsr
