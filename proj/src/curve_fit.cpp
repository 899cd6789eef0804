#include "lrhorizon/curve_fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "lrhorizon/errors.hpp"

namespace lrhorizon {

namespace {

// Gaussian elimination with partial pivoting on a 3x3 system.
std::array<double, 3> solve3(std::array<std::array<double, 4>, 3> m) {
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        std::swap(m[col], m[pivot]);
        if (m[col][col] == 0.0)
            throw UnfittableError("quadratic fit: singular normal equations "
                                  "(learning rates too clustered)");
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            double f = m[r][col] / m[col][col];
            for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
        }
    }
    return {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

// Averages duplicate LRs and returns points sorted by lr.
std::vector<LrLossPoint> condense(std::span<const LrLossPoint> points) {
    std::map<double, std::pair<double, int>> by_lr;
    for (const auto& p : points) {
        if (!(p.lr > 0) || !std::isfinite(p.lr))
            throw ValidationError("quadratic fit: learning rates must be positive");
        if (!std::isfinite(p.loss))
            throw ValidationError("quadratic fit: losses must be finite");
        auto& slot = by_lr[p.lr];
        slot.first += p.loss;
        slot.second += 1;
    }
    std::vector<LrLossPoint> out;
    out.reserve(by_lr.size());
    for (const auto& [lr, acc] : by_lr)
        out.push_back({lr, acc.first / static_cast<double>(acc.second)});
    return out;
}

} // namespace

double LossCurveFit::loss_at(double lr) const {
    double x = std::log10(lr);
    return (a * x + b) * x + c;
}

LossCurveFit fit_quadratic(std::span<const LrLossPoint> points) {
    auto pts = condense(points);
    if (pts.size() < 3) {
        std::ostringstream os;
        os << "quadratic fit needs at least 3 distinct learning rates, got " << pts.size();
        throw UnfittableError(os.str());
    }

    const std::size_t n = pts.size();
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::log10(pts[i].lr);
        y[i] = pts[i].loss;
    }

    // Center x before building the normal equations; conditioning is then
    // set by the sweep's decade span rather than its absolute location.
    double xbar = 0;
    for (double v : x) xbar += v;
    xbar /= static_cast<double>(n);

    double s1 = 0, s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double xc = x[i] - xbar;
        double xc2 = xc * xc;
        s1 += xc;
        s2 += xc2;
        s3 += xc2 * xc;
        s4 += xc2 * xc2;
        t0 += y[i];
        t1 += xc * y[i];
        t2 += xc2 * y[i];
    }
    auto [ac, bc, cc] = solve3({{{s4, s3, s2, t2},
                                 {s3, s2, s1, t1},
                                 {s2, s1, static_cast<double>(n), t0}}});

    LossCurveFit fit;
    fit.a = ac;
    fit.b = bc - 2.0 * ac * xbar;
    fit.c = cc - bc * xbar + ac * xbar * xbar;
    fit.n_points = static_cast<int>(n);
    fit.lr_min = pts.front().lr;
    fit.lr_max = pts.back().lr;

    if (!(fit.a > 0)) {
        std::ostringstream os;
        os << "quadratic fit is not convex (curvature " << fit.a
           << "); the sweep does not bracket a minimum";
        throw NonConvexError(os.str());
    }

    double x_star = xbar - bc / (2.0 * ac);
    fit.lr_star = std::pow(10.0, x_star);
    fit.extrapolated_minimum = fit.lr_star < fit.lr_min || fit.lr_star > fit.lr_max;

    std::vector<double> predicted(n);
    for (std::size_t i = 0; i < n; ++i) {
        double xc = x[i] - xbar;
        predicted[i] = (ac * xc + bc) * xc + cc;
    }
    // OLS with intercept keeps R² in [0, 1]; clamp the floating-point fuzz.
    fit.r_squared = std::clamp(r_squared(y, predicted), 0.0, 1.0);
    return fit;
}

LossCurveFit fit_quadratic(const SweepGroup& group) {
    return fit_quadratic(std::span<const LrLossPoint>(group.points));
}

std::vector<double> suggest_probes(std::span<const double> sampled_lrs, double lr_star) {
    if (!(lr_star > 0)) throw ValidationError("suggest_probes: lr_star must be positive");
    double x_star = std::log10(lr_star);
    bool has_below = false, has_above = false;
    double below = 0, above = 0;
    for (double lr : sampled_lrs) {
        double x = std::log10(lr);
        if (x < x_star && (!has_below || x > below)) {
            below = x;
            has_below = true;
        }
        if (x > x_star && (!has_above || x < above)) {
            above = x;
            has_above = true;
        }
    }
    std::vector<double> probes;
    if (has_below) probes.push_back(std::pow(10.0, 0.5 * (below + x_star)));
    if (has_above) probes.push_back(std::pow(10.0, 0.5 * (x_star + above)));
    return probes;
}

std::vector<double> suggest_probes(const SweepGroup& group, const LossCurveFit& fit) {
    std::vector<double> lrs;
    lrs.reserve(group.points.size());
    for (const auto& p : group.points) lrs.push_back(p.lr);
    return suggest_probes(lrs, fit.lr_star);
}

double loss_penalty(const LossCurveFit& fit, double ratio) {
    if (!(fit.a > 0)) throw NonConvexError("loss_penalty requires a convex fit");
    if (!(ratio > 0)) throw ValidationError("loss_penalty: ratio must be positive");
    double dx = std::log10(ratio);
    return fit.a * dx * dx;
}

double r_squared(std::span<const double> observed, std::span<const double> predicted) {
    if (observed.size() != predicted.size())
        throw ValidationError("r_squared: observed and predicted lengths differ");
    if (observed.size() < 2)
        throw ValidationError("r_squared needs at least 2 points");
    double mean = 0;
    for (double v : observed) mean += v;
    mean /= static_cast<double>(observed.size());
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        ss_res += (observed[i] - predicted[i]) * (observed[i] - predicted[i]);
        ss_tot += (observed[i] - mean) * (observed[i] - mean);
    }
    if (ss_tot == 0)
        throw ValidationError("r_squared is undefined: observed values have zero variance");
    return 1.0 - ss_res / ss_tot;
}

} // namespace lrhorizon
