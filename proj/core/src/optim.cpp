#include "reprofit/optim.hpp"

#include <cmath>
#include <cstddef>
#include <limits>

namespace reprofit {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm_inf(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

}  // namespace

OptimResult minimize_bfgs(const Objective& objective, std::vector<double> x0,
                          const OptimOptions& options) {
    const std::size_t n = x0.size();
    OptimResult res;
    res.x = std::move(x0);
    res.gradient.assign(n, 0.0);
    res.value = objective(res.x, &res.gradient);
    if (!std::isfinite(res.value)) return res;

    // inverse Hessian approximation, row-major, starts at identity
    std::vector<double> H(n * n, 0.0);
    auto reset_H = [&] {
        std::fill(H.begin(), H.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;
    };
    reset_H();

    std::vector<double> p(n), x_new(n), g_new(n), s(n), y(n), Hy(n);
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        res.iterations = iter;
        if (norm_inf(res.gradient) <= options.gradient_tolerance * std::max(1.0, std::fabs(res.value))) {
            res.converged = true;
            return res;
        }

        for (std::size_t i = 0; i < n; ++i) {
            double v = 0.0;
            for (std::size_t j = 0; j < n; ++j) v += H[i * n + j] * res.gradient[j];
            p[i] = -v;
        }
        double slope = dot(p, res.gradient);
        if (!(slope < 0.0)) {
            reset_H();
            for (std::size_t i = 0; i < n; ++i) p[i] = -res.gradient[i];
            slope = dot(p, res.gradient);
            if (!(slope < 0.0)) return res;  // zero gradient handled above
        }

        // Armijo backtracking
        double alpha = 1.0;
        double value_new = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t i = 0; i < n; ++i) x_new[i] = res.x[i] + alpha * p[i];
            value_new = objective(x_new, &g_new);
            if (std::isfinite(value_new) && value_new <= res.value + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            // flat to machine precision along the search direction
            res.converged =
                norm_inf(res.gradient) <= 1e2 * options.gradient_tolerance * std::max(1.0, std::fabs(res.value));
            return res;
        }

        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - res.x[i];
            y[i] = g_new[i] - res.gradient[i];
        }
        res.x = x_new;
        res.value = value_new;
        res.gradient = g_new;

        const double sy = dot(s, y);
        if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
            // H <- (I - s y^T / sy) H (I - y s^T / sy) + s s^T / sy
            const double rho = 1.0 / sy;
            for (std::size_t i = 0; i < n; ++i) {
                double v = 0.0;
                for (std::size_t j = 0; j < n; ++j) v += H[i * n + j] * y[j];
                Hy[i] = v;
            }
            const double yHy = dot(y, Hy);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    H[i * n + j] += -rho * (Hy[i] * s[j] + s[i] * Hy[j]) +
                                    rho * rho * yHy * s[i] * s[j] + rho * s[i] * s[j];
                }
            }
        }
    }
    res.converged = norm_inf(res.gradient) <= options.gradient_tolerance * std::max(1.0, std::fabs(res.value));
    return res;
}

std::vector<double> numeric_hessian(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x, double relative_step) {
    const std::size_t n = x.size();
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = relative_step * std::max(1.0, std::fabs(x[i]));

    std::vector<double> H(n * n, 0.0);
    const double f0 = f(x);
    std::vector<double> xt = x;
    for (std::size_t i = 0; i < n; ++i) {
        // diagonal: (f(x+h) - 2 f(x) + f(x-h)) / h^2
        xt = x;
        xt[i] = x[i] + h[i];
        const double fp = f(xt);
        xt[i] = x[i] - h[i];
        const double fm = f(xt);
        H[i * n + i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            xt = x;
            xt[i] = x[i] + h[i];
            xt[j] = x[j] + h[j];
            const double fpp = f(xt);
            xt[j] = x[j] - h[j];
            const double fpm = f(xt);
            xt[i] = x[i] - h[i];
            const double fmm = f(xt);
            xt[j] = x[j] + h[j];
            const double fmp = f(xt);
            H[i * n + j] = H[j * n + i] = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
        }
    }
    return H;
}

bool invert_matrix(std::vector<double>& a, std::size_t n) {
    std::vector<double> inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
        }
        if (std::fabs(a[pivot * n + col]) < 1e-300) return false;
        if (pivot != col) {
            for (std::size_t k = 0; k < n; ++k) {
                std::swap(a[pivot * n + k], a[col * n + k]);
                std::swap(inv[pivot * n + k], inv[col * n + k]);
            }
        }
        const double d = a[col * n + col];
        for (std::size_t k = 0; k < n; ++k) {
            a[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double m = a[r * n + col];
            if (m == 0.0) continue;
            for (std::size_t k = 0; k < n; ++k) {
                a[r * n + k] -= m * a[col * n + k];
                inv[r * n + k] -= m * inv[col * n + k];
            }
        }
    }
    a = std::move(inv);
    return true;
}

}  // namespace reprofit
