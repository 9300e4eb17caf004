#include "mvsr/optim.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace mvsr {
namespace {

double mean_squared_residual(std::span<const double> pred, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t r = 0; r < pred.size(); ++r) {
        double e = pred[r] - y[r];
        acc += e * e;
    }
    return acc / static_cast<double>(pred.size());
}

} // namespace

double mse(const ParametricModel& model, std::span<const double> theta, const Dataset& data) {
    Expression inst = instantiate(model, theta);
    return mean_squared_residual(evaluate(inst, data.X), data.y);
}

FitResult lm_fit(const ParametricModel& model, const Dataset& data,
                 std::span<const double> theta0, const LmOptions& opts) {
    if (static_cast<int>(theta0.size()) != model.n_params())
        throw std::invalid_argument("theta0 length does not match parameter count");
    if (data.rows() == 0) throw std::invalid_argument("dataset is empty");

    const int n = model.n_params();
    const std::size_t p = data.rows();

    FitResult res;
    res.theta.assign(theta0.begin(), theta0.end());

    if (n == 0) {
        res.loss = mse(model, {}, data);
        res.converged = true;
        res.finite = std::isfinite(res.loss);
        return res;
    }

    InstantiatedModel inst(model, theta0);
    std::vector<double> pred;
    RowMatrix jac = evaluate_with_gradient(inst.expression(), data.X, inst.theta_positions(), pred);
    res.loss = mean_squared_residual(pred, data.y);
    if (!std::isfinite(res.loss)) return res;  // finite = false
    res.finite = true;

    Eigen::MatrixXd normal(n, n);
    Eigen::VectorXd grad(n), step(n);
    std::vector<double> trial(res.theta);
    bool jac_fresh = true;
    double lambda = 1e-3;

    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        res.iterations = iter;
        if (!jac_fresh) {
            jac = evaluate_with_gradient(inst.expression(), data.X, inst.theta_positions(), pred);
            jac_fresh = true;
        }
        normal.setZero();
        grad.setZero();
        bool jac_ok = true;
        for (std::size_t r = 0; r < p && jac_ok; ++r) {
            double e = pred[r] - data.y[r];
            for (int i = 0; i < n; ++i) {
                double ji = jac(r, static_cast<std::size_t>(i));
                if (!std::isfinite(ji)) {
                    jac_ok = false;
                    break;
                }
                grad(i) += ji * e;
                for (int j = i; j < n; ++j) normal(i, j) += ji * jac(r, static_cast<std::size_t>(j));
            }
        }
        if (!jac_ok) break;  // residuals finite but derivatives degenerate; keep current theta

        Eigen::MatrixXd damped = normal.selfadjointView<Eigen::Upper>();
        for (int i = 0; i < n; ++i) damped(i, i) += lambda;
        step = damped.ldlt().solve(-grad);

        bool usable = step.allFinite();
        if (usable) {
            for (int i = 0; i < n; ++i) {
                std::size_t k = static_cast<std::size_t>(i);
                trial[k] = res.theta[k] + step(i);
                if (!std::isfinite(trial[k])) usable = false;
            }
        }
        double trial_loss = std::numeric_limits<double>::infinity();
        if (usable) {
            inst.set_theta(trial);
            trial_loss = mean_squared_residual(evaluate(inst.expression(), data.X), data.y);
            usable = std::isfinite(trial_loss);
        }

        if (usable && trial_loss <= res.loss) {
            double improvement = res.loss - trial_loss;
            res.theta = trial;
            res.loss = trial_loss;
            lambda *= 0.1;
            jac_fresh = false;
            if (opts.on_accept) opts.on_accept(iter, res.loss, lambda);
            if (improvement < opts.tolerance) {
                res.converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (!std::isfinite(lambda)) break;
        }
    }
    return res;
}

} // namespace mvsr
