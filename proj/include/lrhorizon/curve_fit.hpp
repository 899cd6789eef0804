#pragma once

// Quadratic loss-vs-log(LR) curve fitting. The minimizer of the fitted
// parabola is the estimated optimal learning rate LR*.
//
// All fits are ordinary least squares in x = log10(LR), unweighted. LR* is
// invariant under the choice of log base; base 10 is used so coefficients
// are per-decade and human readable.

#include <span>
#include <vector>

#include "lrhorizon/records.hpp"

namespace lrhorizon {

struct LossCurveFit {
    // loss ≈ a x² + b x + c with x = log10(lr)
    double a = 0;
    double b = 0;
    double c = 0;
    double lr_star = 0;        // 10^(-b / 2a)
    double r_squared = 0;
    int n_points = 0;
    bool extrapolated_minimum = false; // lr_star outside [lr_min, lr_max]
    double lr_min = 0;         // sampled LR range of the fitted group
    double lr_max = 0;

    /// Parabola value at a given learning rate.
    double loss_at(double lr) const;
};

/// Fits the quadratic. Duplicate LRs are averaged first; at least 3 distinct
/// LRs are required (UnfittableError), and the fitted curvature must be
/// positive (NonConvexError) — a concave or flat fit means the sweep did not
/// bracket a minimum and widening it is up to the caller.
LossCurveFit fit_quadratic(std::span<const LrLossPoint> points);
LossCurveFit fit_quadratic(const SweepGroup& group);

/// Densification probes: log10-space midpoints between lr_star and its
/// nearest sampled LR strictly below and strictly above. 0, 1 or 2 values;
/// a side is skipped when no sample lies beyond lr_star on that side.
std::vector<double> suggest_probes(std::span<const double> sampled_lrs, double lr_star);
std::vector<double> suggest_probes(const SweepGroup& group, const LossCurveFit& fit);

/// Loss increase of running at ratio·lr_star instead of lr_star, under the
/// fitted parabola: ΔL = a·(log10 ratio)². This is an upper bound on the true
/// penalty at longer horizons, where loss curves flatten.
double loss_penalty(const LossCurveFit& fit, double ratio);

/// Coefficient of determination 1 − SS_res/SS_tot. Requires ≥ 2 points and
/// non-constant `observed` (ValidationError otherwise). Shared by all
/// fitting modules; may be negative for predictions worse than the mean.
double r_squared(std::span<const double> observed, std::span<const double> predicted);

} // namespace lrhorizon
