#pragma once

#include <functional>
#include <span>

#include "mvsr/datasets.hpp"
#include "mvsr/model.hpp"

namespace mvsr {

struct FitResult {
    std::vector<double> theta;
    double loss = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    bool finite = false;  // false when the loss is non-finite at the optimum
};

struct LmOptions {
    int max_iterations = 100;
    double tolerance = 1e-10;  // absolute loss change
    // Called after every accepted step; test hook.
    std::function<void(int iteration, double loss, double lambda)> on_accept;
};

// Mean squared error of the instantiated model; non-finite when any
// prediction is non-finite.
double mse(const ParametricModel& model, std::span<const double> theta, const Dataset& data);

// Levenberg-Marquardt on residuals f(x; theta) - y. The damping factor
// starts at 1e-3, is divided by 10 on an accepted step and multiplied by 10
// on a rejected one; stops on max_iterations or when an accepted step
// improves the loss by less than `tolerance`. A non-finite loss at theta0
// aborts with finite = false. Numerical failure never throws.
FitResult lm_fit(const ParametricModel& model, const Dataset& data,
                 std::span<const double> theta0, const LmOptions& opts = {});

} // namespace mvsr
