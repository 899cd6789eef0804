#pragma once

// Scaling laws for the optimal learning rate:
//
//   horizon law:   LR*(D)    = B · (D/D0)^(−β)
//   joint law:     LR*(N, D) = C · (N/N0)^(−α) · (D/D0)^(−β)
//
// with reference scales N0 = D0 = 1e9 so that B and C are learning rates at
// 1B parameters / 1B tokens. All regression happens in log10 space; the joint
// law minimizes a Huber loss (delta = 1e-3) on log10 residuals by BFGS from a
// multi-start grid.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrhorizon/records.hpp"

namespace lrhorizon {

struct LrPointD {
    double d = 0;       // token horizon
    double lr_star = 0; // measured/estimated optimal LR
};

struct PowerLawFit {
    double b = 0;       // LR* at d_ref
    double beta = 0;
    double d_ref = 1e9;
    double r_squared = 0;
    int n_points = 0;

    double predict(double d) const;
};

/// OLS on log10(lr_star) = log10(B) − β·log10(D/d_ref). Needs ≥ 2 distinct
/// horizons and strictly positive inputs.
PowerLawFit fit_power_law(std::span<const LrPointD> points, double d_ref = 1e9);

struct JointPoint {
    double n = 0;       // model parameters
    double d = 0;       // token horizon
    double lr_star = 0;
};

struct JointFitOptions {
    double huber_delta = 1e-3;
    double grad_tol = 1e-10;
    int max_iters = 500;
    int jobs = 1;       // starts evaluated in parallel; result is identical
    // Multi-start grid over (log10 C, alpha, beta); best converged final loss
    // wins, ties broken by the smallest alpha+beta.
    std::vector<double> log10_c_starts{-4.0, -3.5, -3.0, -2.5};
    std::vector<double> alpha_starts{0.0, 0.25, 0.5};
    std::vector<double> beta_starts{0.0, 0.25, 0.5, 0.75};
};

struct JointLawFit {
    double c = 0;       // LR* at (n_ref, d_ref)
    double alpha = 0;
    double beta = 0;
    double n_ref = 1e9;
    double d_ref = 1e9;
    double huber_delta = 1e-3;
    double rmse_train_log10 = 0; // RMSE of log10 residuals
    double rmse_train = 0;       // RMSE of raw LR residuals
    std::optional<double> r_squared_validation; // on holdout, log10 space
    int n_points = 0;
    // The joint law is calibrated on larger models; fits mixing points from
    // below and above 760M parameters get flagged in reports.
    bool mixed_size_regimes = false;

    double predict(double n, double d) const;
};

/// Huber + BFGS joint fit. Needs ≥ 3 points spanning ≥ 2 distinct N and ≥ 2
/// distinct D. Points are canonicalized (sorted) first, so the result is
/// permutation-invariant and deterministic. Throws FitError if no start
/// converges.
JointLawFit fit_joint_law(std::span<const JointPoint> points,
                          std::span<const JointPoint> holdout = {},
                          const JointFitOptions& opts = {});

double predict_lr(const PowerLawFit& fit, double d);
double predict_lr(const JointLawFit& fit, double n, double d);

/// Mean Huber objective of the joint fit at explicit constants; exposed for
/// diagnostics and tests (finite-difference cross-checks).
double joint_law_objective(std::span<const JointPoint> points, double log10_c,
                           double alpha, double beta, double huber_delta,
                           std::span<double> grad_out, double n_ref = 1e9,
                           double d_ref = 1e9);

struct XYPoint {
    double x = 0;       // D or N, raw counts
    double lr_star = 0;
};

/// Shared-slope ("parallel lines") regression across labelled groups in
/// log10-log10 space: one common slope, one intercept per group. Each group
/// is also fitted independently; the verdict compares the spread of the
/// independent slopes against a tolerance.
struct ParallelSlopesFit {
    double shared_slope = 0;              // −β (or −α) of the pooled fit
    double x_ref = 1e9;
    std::vector<std::string> labels;      // sorted
    std::vector<double> intercepts;       // log10 LR* at x_ref, per group
    std::vector<double> group_slopes;     // independent per-group slopes
    double max_slope_deviation = 0;       // max pairwise |slope_i − slope_j|
    double tolerance = 0.1;
    bool parallel = false;
    double r_squared = 0;                 // of the shared-slope model
};

ParallelSlopesFit
fit_parallel_slopes(const std::map<std::string, std::vector<XYPoint>>& groups,
                    double tolerance = 0.1, double x_ref = 1e9);

} // namespace lrhorizon
