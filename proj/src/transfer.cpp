#include "lrhorizon/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "lrhorizon/errors.hpp"

namespace lrhorizon {

double rule_of_thumb(double lr_at_short, double d_short, double d_long, double beta) {
    if (!(lr_at_short > 0) || !(d_short > 0) || !(d_long > 0))
        throw ValidationError("rule_of_thumb: all inputs must be positive");
    return lr_at_short * std::pow(d_long / d_short, -beta);
}

double mup_depth_lr(double c, int n_layers, double d, double alpha, double beta,
                    double d_ref) {
    if (!(c > 0) || n_layers <= 0 || !(d > 0) || !(d_ref > 0))
        throw ValidationError("mup_depth_lr: all inputs must be positive");
    return c * std::pow(static_cast<double>(n_layers), -alpha) * std::pow(d / d_ref, -beta);
}

double kaplan_baseline(double n_params) {
    if (!(n_params > 0)) throw ValidationError("kaplan_baseline: N must be positive");
    double lr = 0.003239 - 0.0001395 * std::log(n_params / 1e9);
    if (!(lr > 0)) {
        std::ostringstream os;
        os << "kaplan_baseline is out of domain at N = " << n_params
           << " (formula yields " << lr << ")";
        throw ValidationError(os.str());
    }
    return lr;
}

TransferReport evaluate_transfer(std::span<const LrPointD> measured,
                                 std::span<const double> fit_horizons,
                                 double d_ref) {
    std::set<double> measured_ds;
    for (const auto& p : measured) measured_ds.insert(p.d);
    std::set<double> fit_ds(fit_horizons.begin(), fit_horizons.end());
    if (fit_ds.size() < 2)
        throw UnfittableError("evaluate_transfer needs at least 2 fit horizons");
    for (double d : fit_ds) {
        if (!measured_ds.count(d)) {
            std::ostringstream os;
            os << "evaluate_transfer: fit horizon " << d << " has no measured point";
            throw ValidationError(os.str());
        }
    }

    std::vector<LrPointD> fit_points;
    for (const auto& p : measured)
        if (fit_ds.count(p.d)) fit_points.push_back(p);

    TransferReport report;
    report.fit = fit_power_law(fit_points, d_ref);

    std::vector<LrPointD> rows(measured.begin(), measured.end());
    std::sort(rows.begin(), rows.end(),
              [](const LrPointD& a, const LrPointD& b) { return a.d < b.d; });
    for (const auto& p : rows) {
        TransferRow row;
        row.d = p.d;
        row.measured = p.lr_star;
        row.predicted = report.fit.predict(p.d);
        row.ratio = row.measured / row.predicted;
        row.used_in_fit = fit_ds.count(p.d) > 0;
        if (!row.used_in_fit)
            report.max_holdout_rel_error =
                std::max(report.max_holdout_rel_error, std::abs(row.ratio - 1.0));
        report.rows.push_back(row);
    }
    return report;
}

std::string to_string(AuditVerdict v) {
    switch (v) {
        case AuditVerdict::too_large: return "too_large";
        case AuditVerdict::too_small: return "too_small";
        default: return "ok";
    }
}

namespace {

AuditResult make_audit(double predicted, double used_lr, double threshold) {
    if (!(used_lr > 0)) throw ValidationError("audit_run: used_lr must be positive");
    if (!(threshold > 1.0)) throw ValidationError("audit_run: threshold must exceed 1");
    AuditResult result;
    result.predicted_lr = predicted;
    result.used_lr = used_lr;
    result.ratio = used_lr / predicted;
    result.threshold = threshold;
    std::ostringstream os;
    os.precision(3);
    if (result.ratio > threshold) {
        result.verdict = AuditVerdict::too_large;
        os << "LR likely too large: used " << result.ratio << "x the predicted optimum";
    } else if (result.ratio < 1.0 / threshold) {
        result.verdict = AuditVerdict::too_small;
        os << "LR likely too small: used " << result.ratio << "x the predicted optimum";
    } else {
        result.verdict = AuditVerdict::ok;
        os << "LR within " << threshold << "x of the predicted optimum";
    }
    result.message = os.str();
    return result;
}

} // namespace

AuditResult audit_run(const PowerLawFit& fit, double used_lr, double d, double threshold) {
    return make_audit(predict_lr(fit, d), used_lr, threshold);
}

AuditResult audit_run(const JointLawFit& fit, double used_lr, double d, double n,
                      double threshold) {
    return make_audit(predict_lr(fit, n, d), used_lr, threshold);
}

} // namespace lrhorizon
