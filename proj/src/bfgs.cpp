#include "lrhorizon/bfgs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lrhorizon/errors.hpp"

namespace lrhorizon {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Strong-Wolfe line search (bracket + zoom with bisection/interpolation).
// phi(t) = f(x + t d). Returns the accepted step, or 0 when no progress is
// possible at floating-point resolution.
struct LineSearchResult {
    double step = 0;
    double fx = 0;
    std::vector<double> x;
    std::vector<double> grad;
    int evals = 0;
};

class LineSearch {
  public:
    LineSearch(const ObjectiveFn& fn, std::span<const double> x0,
               std::span<const double> dir, double f0, double dphi0)
        : fn_(fn), x0_(x0.begin(), x0.end()), dir_(dir.begin(), dir.end()),
          f0_(f0), dphi0_(dphi0), x_(x0.size()), grad_(x0.size()) {}

    // Evaluates phi(t), phi'(t); keeps x/grad of the last evaluation.
    double eval(double t, double& dphi) {
        for (std::size_t i = 0; i < x_.size(); ++i) x_[i] = x0_[i] + t * dir_[i];
        double f = fn_(x_, grad_);
        dphi = dot(grad_, dir_);
        ++evals_;
        return f;
    }

    LineSearchResult run() {
        constexpr double c1 = 1e-4, c2 = 0.9;
        constexpr int max_evals = 40;
        double t_prev = 0, f_prev = f0_, dphi_prev = dphi0_;
        double t = 1.0;
        double lo = 0, hi = 0, f_lo = f0_;
        bool bracketed = false;

        for (int iter = 0; iter < max_evals && !bracketed; ++iter) {
            double dphi;
            double f = eval(t, dphi);
            if (!std::isfinite(f)) { // overshot into bad territory; shrink
                t *= 0.25;
                continue;
            }
            if (f > f0_ + c1 * t * dphi0_ || (iter > 0 && f >= f_prev)) {
                lo = t_prev; f_lo = f_prev; hi = t;
                bracketed = true;
                break;
            }
            if (std::abs(dphi) <= -c2 * dphi0_) return accept(t, f);
            if (dphi >= 0) {
                lo = t; f_lo = f; hi = t_prev;
                bracketed = true;
                break;
            }
            t_prev = t; f_prev = f; dphi_prev = dphi;
            t *= 2.0;
        }
        if (!bracketed) return accept(0, f0_); // ran off; give up on this direction

        // zoom
        for (int iter = 0; iter < max_evals; ++iter) {
            double t_mid = 0.5 * (lo + hi);
            if (t_mid == lo || t_mid == hi) break; // interval collapsed
            double dphi;
            double f = eval(t_mid, dphi);
            if (!std::isfinite(f) || f > f0_ + c1 * t_mid * dphi0_ || f >= f_lo) {
                hi = t_mid;
            } else {
                if (std::abs(dphi) <= -c2 * dphi0_) return accept(t_mid, f);
                if (dphi * (hi - lo) >= 0) hi = lo;
                lo = t_mid; f_lo = f;
            }
        }
        // Wolfe curvature never satisfied inside the bracket; take the best
        // sufficient-decrease point found, if any.
        if (f_lo < f0_ && lo > 0) {
            double dphi;
            double f = eval(lo, dphi);
            return accept(lo, f);
        }
        return accept(0, f0_);
    }

    LineSearchResult accept(double t, double f) {
        LineSearchResult r;
        r.step = t;
        r.fx = f;
        r.evals = evals_;
        if (t == 0) {
            r.x = x0_;
        } else {
            r.x = x_;
            r.grad = grad_;
        }
        return r;
    }

  private:
    const ObjectiveFn& fn_;
    std::vector<double> x0_, dir_;
    double f0_, dphi0_;
    std::vector<double> x_, grad_;
    int evals_ = 0;
};

} // namespace

MinimizeResult minimize_bfgs(const ObjectiveFn& fn, std::span<const double> x0,
                             const MinimizeOptions& opts) {
    const std::size_t n = x0.size();
    if (n == 0) throw ValidationError("minimize_bfgs: empty parameter vector");

    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> grad(n), grad_new(n), dir(n), s(n), y(n), hy(n);
    // Inverse Hessian approximation, dense row-major.
    std::vector<double> H(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;

    double fx = fn(x, grad);
    MinimizeResult result;
    result.grad_norm = norm2(grad);

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        if (result.grad_norm <= opts.grad_tol) {
            result.converged = true;
            break;
        }
        // dir = -H * grad
        for (std::size_t i = 0; i < n; ++i) {
            double v = 0;
            for (std::size_t j = 0; j < n; ++j) v += H[i * n + j] * grad[j];
            dir[i] = -v;
        }
        double dphi0 = dot(grad, dir);
        if (dphi0 >= 0) { // H lost positive definiteness; restart from identity
            std::fill(H.begin(), H.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                H[i * n + i] = 1.0;
                dir[i] = -grad[i];
            }
            dphi0 = dot(grad, dir);
            if (dphi0 >= 0) break; // gradient numerically zero
        }

        LineSearch search(fn, x, dir, fx, dphi0);
        auto ls = search.run();
        if (ls.step == 0) break; // no representable progress along dir

        for (std::size_t i = 0; i < n; ++i) {
            s[i] = ls.x[i] - x[i];
            y[i] = ls.grad[i] - grad[i];
        }
        x = ls.x;
        fx = ls.fx;
        grad_new = ls.grad;

        double sy = dot(s, y);
        if (sy > 1e-12 * norm2(s) * norm2(y)) {
            if (iter == 0) { // scale the initial metric to the first curvature
                double yy = dot(y, y);
                if (yy > 0) {
                    double scale = sy / yy;
                    for (std::size_t i = 0; i < n; ++i) H[i * n + i] = scale;
                }
            }
            // BFGS inverse update:
            // H <- (I - s y^T / sy) H (I - y s^T / sy) + s s^T / sy
            double rho = 1.0 / sy;
            for (std::size_t i = 0; i < n; ++i) {
                double v = 0;
                for (std::size_t j = 0; j < n; ++j) v += H[i * n + j] * y[j];
                hy[i] = v;
            }
            double yhy = dot(y, hy);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    H[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) +
                                    rho * (1.0 + rho * yhy) * s[i] * s[j];
                }
            }
        } // else: curvature condition failed, skip the update

        grad = grad_new;
        result.grad_norm = norm2(grad);
        result.iterations = iter + 1;
    }

    if (!result.converged && result.grad_norm <= opts.grad_tol) result.converged = true;
    result.x = std::move(x);
    result.fx = fx;
    return result;
}

} // namespace lrhorizon
