#pragma once

#include <functional>
#include <vector>

namespace reprofit {

/// Objective for minimization: returns the value at x and, when grad is
/// non-null, fills the gradient.
using Objective = std::function<double(const std::vector<double>& x, std::vector<double>* grad)>;

struct OptimOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-8;  // on ||grad||_inf / max(1, |value|)
};

struct OptimResult {
    std::vector<double> x;
    double value = 0.0;
    std::vector<double> gradient;
    bool converged = false;
    int iterations = 0;
};

/// BFGS with backtracking Armijo line search. Requires a gradient.
OptimResult minimize_bfgs(const Objective& objective, std::vector<double> x0,
                          const OptimOptions& options = {});

/// Central-difference Hessian of a scalar function (no gradient needed).
std::vector<double> numeric_hessian(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x, double relative_step = 1e-4);

/// In-place Gauss-Jordan inverse of a dense n x n matrix (row-major).
/// Returns false if the matrix is singular to working precision.
bool invert_matrix(std::vector<double>& a, std::size_t n);

}  // namespace reprofit
