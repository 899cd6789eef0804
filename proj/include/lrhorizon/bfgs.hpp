#pragma once

// Small dense BFGS quasi-Newton minimizer with a strong-Wolfe line search.
// Meant for low-dimensional smooth objectives (the joint scaling-law fit has
// three parameters); deliberately self-contained so fits are bit-reproducible
// across builds.

#include <functional>
#include <span>
#include <vector>

namespace lrhorizon {

/// Objective callback: fills `grad` (same size as x) and returns f(x).
using ObjectiveFn = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct MinimizeOptions {
    double grad_tol = 1e-10; // converged when ||grad||_2 <= grad_tol
    int max_iters = 500;
};

struct MinimizeResult {
    std::vector<double> x;
    double fx = 0;
    double grad_norm = 0;
    int iterations = 0;
    bool converged = false;
};

MinimizeResult minimize_bfgs(const ObjectiveFn& fn, std::span<const double> x0,
                             const MinimizeOptions& opts = {});

} // namespace lrhorizon
