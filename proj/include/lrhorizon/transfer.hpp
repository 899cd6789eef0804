#pragma once

// Practitioner-facing prediction rules: transfer a measured optimal LR to a
// longer horizon, simulate transfer against held-out horizons, and audit a
// run's LR against a fitted law.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrhorizon/scaling_laws.hpp"

namespace lrhorizon {

/// Zero-overhead rule of thumb: LR*(d_long) = lr_at_short · (d_long/d_short)^(−beta).
/// beta = 0.32 is the exponent that generalizes across architectures for
/// models ≥ 760M parameters. Composes exactly: D1→D2 then D2→D3 equals D1→D3.
double rule_of_thumb(double lr_at_short, double d_short, double d_long,
                     double beta = 0.32);

/// Depth-based variant for width-transferring parametrizations:
/// LR*(n_layers, D) = C · n_layers^(−alpha) · (D/d_ref)^(−beta). C comes from
/// the usual small-width/depth/horizon sweep.
double mup_depth_lr(double c, int n_layers, double d, double alpha, double beta,
                    double d_ref = 1e9);

/// Classic LR(N) baseline: 0.003239 − 0.0001395·ln(N in billions). Included
/// for comparison columns only. The source did not pin the log base or units;
/// natural log with N in billions is the convention fixed here. Errors when
/// the formula goes non-positive (N above ~1.2e19 parameters).
double kaplan_baseline(double n_params);

struct TransferRow {
    double d = 0;
    double measured = 0;
    double predicted = 0;   // in-sample prediction on fit horizons
    double ratio = 0;       // measured / predicted
    bool used_in_fit = false;
};

struct TransferReport {
    std::vector<TransferRow> rows;   // horizon-ordered
    PowerLawFit fit;                 // fitted on the fit_horizons subset
    double max_holdout_rel_error = 0; // max |ratio − 1| over held-out rows
};

/// Fits the horizon law on the subset of measured points whose D is in
/// fit_horizons (≥ 2 required, all must be measured) and predicts every
/// measured horizon.
TransferReport evaluate_transfer(std::span<const LrPointD> measured,
                                 std::span<const double> fit_horizons,
                                 double d_ref = 1e9);

enum class AuditVerdict { ok, too_large, too_small };

std::string to_string(AuditVerdict v);

struct AuditResult {
    double predicted_lr = 0;
    double used_lr = 0;
    double ratio = 0;      // used / predicted
    double threshold = 1.5;
    AuditVerdict verdict = AuditVerdict::ok;
    std::string message;
};

/// Compares a run's LR against the fitted law. The verdict depends only on
/// the ratio: > threshold flags too large, < 1/threshold too small. The
/// default 1.5 flags a 2.5x miss clearly while tolerating ~15% fit error.
AuditResult audit_run(const PowerLawFit& fit, double used_lr, double d,
                      double threshold = 1.5);
AuditResult audit_run(const JointLawFit& fit, double used_lr, double d, double n,
                      double threshold = 1.5);

} // namespace lrhorizon
