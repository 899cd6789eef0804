#include "lrhorizon/scaling_laws.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "lrhorizon/bfgs.hpp"
#include "lrhorizon/curve_fit.hpp"
#include "lrhorizon/errors.hpp"

namespace lrhorizon {

double PowerLawFit::predict(double d) const {
    return b * std::pow(d / d_ref, -beta);
}

double predict_lr(const PowerLawFit& fit, double d) {
    if (!(d > 0)) throw ValidationError("predict_lr: token horizon must be positive");
    return fit.predict(d);
}

PowerLawFit fit_power_law(std::span<const LrPointD> points, double d_ref) {
    if (!(d_ref > 0)) throw ValidationError("fit_power_law: d_ref must be positive");
    std::set<double> distinct;
    for (const auto& p : points) {
        if (!(p.d > 0) || !(p.lr_star > 0))
            throw ValidationError("fit_power_law: horizons and learning rates must be positive");
        distinct.insert(p.d);
    }
    if (distinct.size() < 2) {
        std::ostringstream os;
        os << "power-law fit needs at least 2 distinct horizons, got " << distinct.size();
        throw UnfittableError(os.str());
    }

    const std::size_t n = points.size();
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::log10(points[i].d / d_ref);
        y[i] = std::log10(points[i].lr_star);
    }
    double xbar = 0, ybar = 0;
    for (std::size_t i = 0; i < n; ++i) {
        xbar += x[i];
        ybar += y[i];
    }
    xbar /= static_cast<double>(n);
    ybar /= static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - xbar) * (x[i] - xbar);
        sxy += (x[i] - xbar) * (y[i] - ybar);
    }
    double slope = sxy / sxx;
    double intercept = ybar - slope * xbar;

    PowerLawFit fit;
    fit.b = std::pow(10.0, intercept);
    fit.beta = -slope;
    fit.d_ref = d_ref;
    fit.n_points = static_cast<int>(n);

    std::vector<double> predicted(n);
    for (std::size_t i = 0; i < n; ++i) predicted[i] = intercept + slope * x[i];
    double ss_tot = 0;
    for (double v : y) ss_tot += (v - ybar) * (v - ybar);
    if (ss_tot == 0) {
        fit.r_squared = 1.0; // flat data, interpolated exactly by slope 0
    } else {
        fit.r_squared = std::clamp(r_squared(y, predicted), 0.0, 1.0);
    }
    return fit;
}

// ---------------------------------------------------------------------------
// Joint law

double JointLawFit::predict(double n, double d) const {
    return c * std::pow(n / n_ref, -alpha) * std::pow(d / d_ref, -beta);
}

double predict_lr(const JointLawFit& fit, double n, double d) {
    if (!(d > 0)) throw ValidationError("predict_lr: token horizon must be positive");
    if (!(n > 0))
        throw ValidationError("predict_lr: joint-law prediction requires a positive model size");
    return fit.predict(n, d);
}

namespace {

// Classic Huber: 0.5 r² inside delta, delta(|r| − 0.5 delta) outside.
inline double huber(double r, double delta) {
    double a = std::abs(r);
    return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

inline double huber_deriv(double r, double delta) {
    return std::clamp(r, -delta, delta);
}

struct JointDesign {
    std::vector<double> u; // log10(N/n_ref)
    std::vector<double> v; // log10(D/d_ref)
    std::vector<double> y; // log10(lr_star)
};

JointDesign make_design(std::span<const JointPoint> points, double n_ref, double d_ref) {
    JointDesign d;
    d.u.reserve(points.size());
    d.v.reserve(points.size());
    d.y.reserve(points.size());
    for (const auto& p : points) {
        d.u.push_back(std::log10(p.n / n_ref));
        d.v.push_back(std::log10(p.d / d_ref));
        d.y.push_back(std::log10(p.lr_star));
    }
    return d;
}

// Mean Huber loss over residuals r_i = y_i − (c − α u_i − β v_i), θ = (c, α, β).
double joint_objective(const JointDesign& d, std::span<const double> theta,
                       double delta, std::span<double> grad) {
    const double c = theta[0], alpha = theta[1], beta = theta[2];
    const std::size_t n = d.y.size();
    double loss = 0, gc = 0, ga = 0, gb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = d.y[i] - (c - alpha * d.u[i] - beta * d.v[i]);
        loss += huber(r, delta);
        double psi = huber_deriv(r, delta);
        gc -= psi;             // ∂r/∂c = −1
        ga += psi * d.u[i];    // ∂r/∂α = +u
        gb += psi * d.v[i];    // ∂r/∂β = +v
    }
    double inv_n = 1.0 / static_cast<double>(n);
    if (!grad.empty()) {
        grad[0] = gc * inv_n;
        grad[1] = ga * inv_n;
        grad[2] = gb * inv_n;
    }
    return loss * inv_n;
}

} // namespace

double joint_law_objective(std::span<const JointPoint> points, double log10_c,
                           double alpha, double beta, double huber_delta,
                           std::span<double> grad_out, double n_ref, double d_ref) {
    auto design = make_design(points, n_ref, d_ref);
    std::array<double, 3> theta{log10_c, alpha, beta};
    return joint_objective(design, theta, huber_delta, grad_out);
}

JointLawFit fit_joint_law(std::span<const JointPoint> points,
                          std::span<const JointPoint> holdout,
                          const JointFitOptions& opts) {
    std::set<double> distinct_n, distinct_d;
    for (const auto& p : points) {
        if (!(p.n > 0) || !(p.d > 0) || !(p.lr_star > 0))
            throw ValidationError("fit_joint_law: all point values must be positive");
        distinct_n.insert(p.n);
        distinct_d.insert(p.d);
    }
    if (points.size() < 3)
        throw UnfittableError("joint-law fit needs at least 3 points");
    if (distinct_n.size() < 2)
        throw UnfittableError("joint-law fit needs at least 2 distinct model sizes; "
                              "all points share one N (use fit_power_law instead)");
    if (distinct_d.size() < 2)
        throw UnfittableError("joint-law fit needs at least 2 distinct token horizons; "
                              "all points share one D");

    // Canonical point order makes the fit permutation-invariant bit-for-bit.
    std::vector<JointPoint> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end(), [](const JointPoint& a, const JointPoint& b) {
        return std::tie(a.n, a.d, a.lr_star) < std::tie(b.n, b.d, b.lr_star);
    });

    const double n_ref = 1e9, d_ref = 1e9;
    auto design = make_design(sorted, n_ref, d_ref);
    auto objective = [&](std::span<const double> theta, std::span<double> grad) {
        return joint_objective(design, theta, opts.huber_delta, grad);
    };

    struct Start {
        std::array<double, 3> theta;
    };
    std::vector<Start> starts;
    for (double c0 : opts.log10_c_starts)
        for (double a0 : opts.alpha_starts)
            for (double b0 : opts.beta_starts) starts.push_back({{c0, a0, b0}});

    std::vector<MinimizeResult> results(starts.size());
    MinimizeOptions mopts{.grad_tol = opts.grad_tol, .max_iters = opts.max_iters};
    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            results[i] = minimize_bfgs(objective, starts[i].theta, mopts);
    };
    int jobs = std::max(1, opts.jobs);
    if (jobs == 1 || starts.size() < 2) {
        run_range(0, starts.size());
    } else {
        std::vector<std::thread> threads;
        std::size_t per = (starts.size() + jobs - 1) / jobs;
        for (std::size_t begin = 0; begin < starts.size(); begin += per)
            threads.emplace_back(run_range, begin, std::min(begin + per, starts.size()));
        for (auto& t : threads) t.join();
    }

    // Winner: lowest converged loss; near-ties (relative 1e-9) go to the
    // smallest alpha+beta so flat directions resolve deterministically.
    const MinimizeResult* best = nullptr;
    double best_any_loss = std::numeric_limits<double>::infinity();
    for (const auto& r : results) {
        best_any_loss = std::min(best_any_loss, r.fx);
        if (!r.converged) continue;
        if (!best) {
            best = &r;
            continue;
        }
        double tie_eps = 1e-9 * std::max(1.0, std::abs(best->fx));
        if (r.fx < best->fx - tie_eps ||
            (std::abs(r.fx - best->fx) <= tie_eps &&
             r.x[1] + r.x[2] < best->x[1] + best->x[2])) {
            best = &r;
        }
    }
    if (!best) {
        std::ostringstream os;
        os << "joint-law fit did not converge from any of " << starts.size()
           << " starts (best residual " << best_any_loss << ")";
        throw FitError(os.str());
    }

    JointLawFit fit;
    fit.c = std::pow(10.0, best->x[0]);
    fit.alpha = best->x[1];
    fit.beta = best->x[2];
    fit.n_ref = n_ref;
    fit.d_ref = d_ref;
    fit.huber_delta = opts.huber_delta;
    fit.n_points = static_cast<int>(sorted.size());

    double ss_log = 0, ss_raw = 0;
    for (const auto& p : sorted) {
        double pred = fit.predict(p.n, p.d);
        double rl = std::log10(p.lr_star) - std::log10(pred);
        ss_log += rl * rl;
        ss_raw += (p.lr_star - pred) * (p.lr_star - pred);
    }
    fit.rmse_train_log10 = std::sqrt(ss_log / static_cast<double>(sorted.size()));
    fit.rmse_train = std::sqrt(ss_raw / static_cast<double>(sorted.size()));

    bool has_small = false, has_large = false;
    for (const auto& p : sorted) (p.n < 760e6 ? has_small : has_large) = true;
    fit.mixed_size_regimes = has_small && has_large;

    if (!holdout.empty()) {
        std::vector<double> obs, pred;
        obs.reserve(holdout.size());
        pred.reserve(holdout.size());
        for (const auto& p : holdout) {
            if (!(p.n > 0) || !(p.d > 0) || !(p.lr_star > 0))
                throw ValidationError("fit_joint_law: holdout values must be positive");
            obs.push_back(std::log10(p.lr_star));
            pred.push_back(std::log10(fit.predict(p.n, p.d)));
        }
        if (holdout.size() >= 2)
            fit.r_squared_validation = r_squared(obs, pred);
    }
    return fit;
}

// ---------------------------------------------------------------------------
// Parallel slopes

ParallelSlopesFit
fit_parallel_slopes(const std::map<std::string, std::vector<XYPoint>>& groups,
                    double tolerance, double x_ref) {
    if (groups.empty())
        throw ValidationError("fit_parallel_slopes: at least one group required");
    if (!(x_ref > 0)) throw ValidationError("fit_parallel_slopes: x_ref must be positive");

    ParallelSlopesFit fit;
    fit.x_ref = x_ref;
    fit.tolerance = tolerance;

    struct GroupData {
        std::vector<double> x, y;
        double xbar = 0, ybar = 0;
    };
    std::vector<GroupData> data;
    for (const auto& [label, pts] : groups) {
        if (pts.size() < 2) {
            std::ostringstream os;
            os << "fit_parallel_slopes: group '" << label << "' has " << pts.size()
               << " point(s); at least 2 required";
            throw UnfittableError(os.str());
        }
        GroupData g;
        for (const auto& p : pts) {
            if (!(p.x > 0) || !(p.lr_star > 0))
                throw ValidationError("fit_parallel_slopes: values must be positive (group '" +
                                      label + "')");
            g.x.push_back(std::log10(p.x / x_ref));
            g.y.push_back(std::log10(p.lr_star));
        }
        std::set<double> distinct(g.x.begin(), g.x.end());
        if (distinct.size() < 2) {
            std::ostringstream os;
            os << "fit_parallel_slopes: group '" << label << "' has fewer than 2 distinct x values";
            throw UnfittableError(os.str());
        }
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            g.xbar += g.x[i];
            g.ybar += g.y[i];
        }
        g.xbar /= static_cast<double>(g.x.size());
        g.ybar /= static_cast<double>(g.x.size());
        data.push_back(std::move(g));
        fit.labels.push_back(label);
    }

    // Shared slope: pooled within-group least squares (each group centered on
    // its own means); per-group intercept then follows from the group means.
    double sxx = 0, sxy = 0;
    for (const auto& g : data) {
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            sxx += (g.x[i] - g.xbar) * (g.x[i] - g.xbar);
            sxy += (g.x[i] - g.xbar) * (g.y[i] - g.ybar);
        }
    }
    fit.shared_slope = sxy / sxx;

    double ss_res = 0, ss_tot = 0, ybar_all = 0;
    std::size_t n_all = 0;
    for (const auto& g : data) {
        ybar_all += g.ybar * static_cast<double>(g.x.size());
        n_all += g.x.size();
    }
    ybar_all /= static_cast<double>(n_all);

    for (auto& g : data) {
        fit.intercepts.push_back(g.ybar - fit.shared_slope * g.xbar);
        double gxx = 0, gxy = 0;
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            gxx += (g.x[i] - g.xbar) * (g.x[i] - g.xbar);
            gxy += (g.x[i] - g.xbar) * (g.y[i] - g.ybar);
            double resid = g.y[i] - (g.ybar + fit.shared_slope * (g.x[i] - g.xbar));
            ss_res += resid * resid;
            ss_tot += (g.y[i] - ybar_all) * (g.y[i] - ybar_all);
        }
        fit.group_slopes.push_back(gxy / gxx);
    }
    fit.r_squared = ss_tot > 0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;

    auto [mn, mx] = std::minmax_element(fit.group_slopes.begin(), fit.group_slopes.end());
    fit.max_slope_deviation = *mx - *mn;
    fit.parallel = fit.max_slope_deviation <= tolerance;
    return fit;
}

} // namespace lrhorizon
