#include <cmath>
#include <cstring>
#include <vector>

#include "mvsr/expr.hpp"

namespace mvsr {
namespace {

void check_inputs(const Expression& expr, const RowMatrix& X) {
    if (expr.max_variable_index() >= static_cast<int>(X.cols))
        throw std::out_of_range("variable index out of range for input matrix");
    if (expr.max_parameter_index() >= 0)
        throw std::invalid_argument("expression contains unbound parameters");
}

} // namespace

std::vector<double> evaluate(const Expression& expr, const RowMatrix& X) {
    check_inputs(expr, X);
    const std::size_t p = X.rows;
    const std::size_t slots = static_cast<std::size_t>(expr.depth()) + 1;

    thread_local std::vector<double> buf;
    if (buf.size() < slots * p) buf.resize(slots * p);

    std::size_t sp = 0;
    for (const Node& n : expr.nodes()) {
        switch (n.kind) {
            case NodeKind::kConstant: {
                double* out = &buf[sp++ * p];
                for (std::size_t r = 0; r < p; ++r) out[r] = n.value;
                break;
            }
            case NodeKind::kVariable: {
                double* out = &buf[sp++ * p];
                const double* col = X.data.data() + n.index;
                for (std::size_t r = 0; r < p; ++r) out[r] = col[r * X.cols];
                break;
            }
            case NodeKind::kParameter:
                break;  // unreachable, checked above
            case NodeKind::kAdd: {
                double* a = &buf[(sp - 2) * p];
                const double* b = &buf[(sp - 1) * p];
                for (std::size_t r = 0; r < p; ++r) a[r] += b[r];
                --sp;
                break;
            }
            case NodeKind::kSub: {
                double* a = &buf[(sp - 2) * p];
                const double* b = &buf[(sp - 1) * p];
                for (std::size_t r = 0; r < p; ++r) a[r] -= b[r];
                --sp;
                break;
            }
            case NodeKind::kMul: {
                double* a = &buf[(sp - 2) * p];
                const double* b = &buf[(sp - 1) * p];
                for (std::size_t r = 0; r < p; ++r) a[r] *= b[r];
                --sp;
                break;
            }
            case NodeKind::kDiv: {
                double* a = &buf[(sp - 2) * p];
                const double* b = &buf[(sp - 1) * p];
                for (std::size_t r = 0; r < p; ++r) a[r] /= b[r];
                --sp;
                break;
            }
            case NodeKind::kPow: {
                double* a = &buf[(sp - 2) * p];
                const double* b = &buf[(sp - 1) * p];
                for (std::size_t r = 0; r < p; ++r) a[r] = std::pow(a[r], b[r]);
                --sp;
                break;
            }
            case NodeKind::kSquare: {
                double* a = &buf[(sp - 1) * p];
                for (std::size_t r = 0; r < p; ++r) a[r] *= a[r];
                break;
            }
            case NodeKind::kExp: {
                double* a = &buf[(sp - 1) * p];
                for (std::size_t r = 0; r < p; ++r) a[r] = std::exp(a[r]);
                break;
            }
            case NodeKind::kSqrt: {
                double* a = &buf[(sp - 1) * p];
                for (std::size_t r = 0; r < p; ++r) a[r] = std::sqrt(a[r]);
                break;
            }
            case NodeKind::kSin: {
                double* a = &buf[(sp - 1) * p];
                for (std::size_t r = 0; r < p; ++r) a[r] = std::sin(a[r]);
                break;
            }
            case NodeKind::kLog: {
                double* a = &buf[(sp - 1) * p];
                for (std::size_t r = 0; r < p; ++r) a[r] = std::log(a[r]);
                break;
            }
            case NodeKind::kAbs: {
                double* a = &buf[(sp - 1) * p];
                for (std::size_t r = 0; r < p; ++r) a[r] = std::fabs(a[r]);
                break;
            }
            case NodeKind::kNeg: {
                double* a = &buf[(sp - 1) * p];
                for (std::size_t r = 0; r < p; ++r) a[r] = -a[r];
                break;
            }
        }
    }
    return std::vector<double>(buf.begin(), buf.begin() + p);
}

// Value plus tangents. Each stack slot holds (1 + k) rows of length p: the
// value first, then one derivative row per seed, in seed order.
RowMatrix evaluate_with_gradient(const Expression& expr, const RowMatrix& X,
                                 std::span<const std::size_t> seeds,
                                 std::vector<double>& values) {
    check_inputs(expr, X);
    const std::size_t p = X.rows;
    const std::size_t k = seeds.size();
    const std::size_t stride = (1 + k) * p;
    const std::size_t slots = static_cast<std::size_t>(expr.depth()) + 1;

    thread_local std::vector<double> buf;
    if (buf.size() < slots * stride) buf.resize(slots * stride);

    std::size_t sp = 0;
    std::size_t pos = 0;
    for (const Node& n : expr.nodes()) {
        switch (n.kind) {
            case NodeKind::kConstant:
            case NodeKind::kVariable: {
                double* slot = &buf[sp++ * stride];
                if (n.kind == NodeKind::kConstant) {
                    for (std::size_t r = 0; r < p; ++r) slot[r] = n.value;
                } else {
                    const double* col = X.data.data() + n.index;
                    for (std::size_t r = 0; r < p; ++r) slot[r] = col[r * X.cols];
                }
                std::memset(slot + p, 0, k * p * sizeof(double));
                for (std::size_t j = 0; j < k; ++j)
                    if (seeds[j] == pos)
                        for (std::size_t r = 0; r < p; ++r) slot[(1 + j) * p + r] = 1.0;
                break;
            }
            case NodeKind::kParameter:
                break;  // unreachable
            case NodeKind::kAdd: {
                double* a = &buf[(sp - 2) * stride];
                const double* b = &buf[(sp - 1) * stride];
                for (std::size_t i = 0; i < stride; ++i) a[i] += b[i];
                --sp;
                break;
            }
            case NodeKind::kSub: {
                double* a = &buf[(sp - 2) * stride];
                const double* b = &buf[(sp - 1) * stride];
                for (std::size_t i = 0; i < stride; ++i) a[i] -= b[i];
                --sp;
                break;
            }
            case NodeKind::kMul: {
                double* a = &buf[(sp - 2) * stride];
                const double* b = &buf[(sp - 1) * stride];
                for (std::size_t j = 0; j < k; ++j) {
                    double* ta = a + (1 + j) * p;
                    const double* tb = b + (1 + j) * p;
                    for (std::size_t r = 0; r < p; ++r) ta[r] = ta[r] * b[r] + a[r] * tb[r];
                }
                for (std::size_t r = 0; r < p; ++r) a[r] *= b[r];
                --sp;
                break;
            }
            case NodeKind::kDiv: {
                double* a = &buf[(sp - 2) * stride];
                const double* b = &buf[(sp - 1) * stride];
                for (std::size_t r = 0; r < p; ++r) {
                    double v = a[r] / b[r];
                    for (std::size_t j = 0; j < k; ++j) {
                        double* ta = a + (1 + j) * p;
                        const double* tb = b + (1 + j) * p;
                        ta[r] = (ta[r] - v * tb[r]) / b[r];
                    }
                    a[r] = v;
                }
                --sp;
                break;
            }
            case NodeKind::kPow: {
                double* a = &buf[(sp - 2) * stride];
                const double* b = &buf[(sp - 1) * stride];
                for (std::size_t r = 0; r < p; ++r) {
                    double base = a[r];
                    double expo = b[r];
                    double v = std::pow(base, expo);
                    double dbase = expo * std::pow(base, expo - 1.0);
                    for (std::size_t j = 0; j < k; ++j) {
                        double* ta = a + (1 + j) * p;
                        const double* tb = b + (1 + j) * p;
                        // A structurally zero exponent tangent must not pick
                        // up log's NaN for negative bases.
                        double t = ta[r] == 0.0 ? 0.0 : dbase * ta[r];
                        if (tb[r] != 0.0) t += v * std::log(base) * tb[r];
                        ta[r] = t;
                    }
                    a[r] = v;
                }
                --sp;
                break;
            }
            case NodeKind::kSquare: {
                double* a = &buf[(sp - 1) * stride];
                for (std::size_t j = 0; j < k; ++j) {
                    double* ta = a + (1 + j) * p;
                    for (std::size_t r = 0; r < p; ++r) ta[r] *= 2.0 * a[r];
                }
                for (std::size_t r = 0; r < p; ++r) a[r] *= a[r];
                break;
            }
            case NodeKind::kExp: {
                double* a = &buf[(sp - 1) * stride];
                for (std::size_t r = 0; r < p; ++r) {
                    double v = std::exp(a[r]);
                    for (std::size_t j = 0; j < k; ++j) a[(1 + j) * p + r] *= v;
                    a[r] = v;
                }
                break;
            }
            case NodeKind::kSqrt: {
                double* a = &buf[(sp - 1) * stride];
                for (std::size_t r = 0; r < p; ++r) {
                    double v = std::sqrt(a[r]);
                    for (std::size_t j = 0; j < k; ++j) a[(1 + j) * p + r] /= 2.0 * v;
                    a[r] = v;
                }
                break;
            }
            case NodeKind::kSin: {
                double* a = &buf[(sp - 1) * stride];
                for (std::size_t r = 0; r < p; ++r) {
                    double c = std::cos(a[r]);
                    for (std::size_t j = 0; j < k; ++j) a[(1 + j) * p + r] *= c;
                    a[r] = std::sin(a[r]);
                }
                break;
            }
            case NodeKind::kLog: {
                double* a = &buf[(sp - 1) * stride];
                for (std::size_t r = 0; r < p; ++r) {
                    for (std::size_t j = 0; j < k; ++j) a[(1 + j) * p + r] /= a[r];
                    a[r] = std::log(a[r]);
                }
                break;
            }
            case NodeKind::kAbs: {
                double* a = &buf[(sp - 1) * stride];
                for (std::size_t r = 0; r < p; ++r) {
                    double s = a[r] > 0.0 ? 1.0 : (a[r] < 0.0 ? -1.0 : 0.0);
                    for (std::size_t j = 0; j < k; ++j) a[(1 + j) * p + r] *= s;
                    a[r] = std::fabs(a[r]);
                }
                break;
            }
            case NodeKind::kNeg: {
                double* a = &buf[(sp - 1) * stride];
                for (std::size_t i = 0; i < stride; ++i) a[i] = -a[i];
                break;
            }
        }
        ++pos;
    }

    values.assign(buf.begin(), buf.begin() + p);
    RowMatrix jac(p, k);
    for (std::size_t r = 0; r < p; ++r)
        for (std::size_t j = 0; j < k; ++j) jac(r, j) = buf[(1 + j) * p + r];
    return jac;
}

RowMatrix grad_constants(const Expression& expr, const RowMatrix& X) {
    std::vector<std::size_t> seeds;
    std::size_t pos = 0;
    for (const Node& n : expr.nodes()) {
        if (n.kind == NodeKind::kConstant) seeds.push_back(pos);
        ++pos;
    }
    std::vector<double> values;
    return evaluate_with_gradient(expr, X, seeds, values);
}

} // namespace mvsr
