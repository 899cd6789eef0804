#include "lrhorizon/serialize.hpp"

#include <nlohmann/json.hpp>

#include "lrhorizon/errors.hpp"

namespace lrhorizon {

using nlohmann::json;

namespace {

double get_number(const json& j, const char* field, const std::string& where) {
    auto it = j.find(field);
    if (it == j.end()) {
        std::string prefix = where.empty() ? "" : where + ": ";
        throw ValidationError(prefix + "missing required field '" + field + "'");
    }
    if (!it->is_number()) {
        std::string prefix = where.empty() ? "" : where + ": ";
        throw ValidationError(prefix + "field '" + field + "' must be a number");
    }
    return it->get<double>();
}

std::string get_string(const json& j, const char* field, const std::string& where) {
    auto it = j.find(field);
    if (it == j.end()) {
        std::string prefix = where.empty() ? "" : where + ": ";
        throw ValidationError(prefix + "missing required field '" + field + "'");
    }
    if (!it->is_string()) {
        std::string prefix = where.empty() ? "" : where + ": ";
        throw ValidationError(prefix + "field '" + field + "' must be a string");
    }
    return it->get<std::string>();
}

} // namespace

json to_json(const RunRecord& rec) {
    json j{{"model_name", rec.model_name},
           {"n_params", rec.n_params},
           {"batch_size_tokens", rec.batch_size_tokens},
           {"token_horizon", rec.token_horizon},
           {"max_lr", rec.max_lr},
           {"seed", rec.seed},
           {"status", to_string(rec.status)},
           {"parametrization", to_string(rec.parametrization)}};
    if (rec.final_val_loss) j["final_val_loss"] = *rec.final_val_loss;
    if (rec.n_layers) j["n_layers"] = *rec.n_layers;
    if (rec.unique_tokens) j["unique_tokens"] = *rec.unique_tokens;
    if (rec.architecture) j["architecture"] = *rec.architecture;
    return j;
}

RunRecord record_from_json(const json& j, const std::string& where) {
    RunRecord rec;
    rec.model_name = get_string(j, "model_name", where);
    rec.n_params = get_number(j, "n_params", where);
    rec.batch_size_tokens = get_number(j, "batch_size_tokens", where);
    rec.token_horizon = get_number(j, "token_horizon", where);
    rec.max_lr = get_number(j, "max_lr", where);
    if (j.contains("n_layers") && !j["n_layers"].is_null())
        rec.n_layers = static_cast<int>(get_number(j, "n_layers", where));
    if (j.contains("final_val_loss") && !j["final_val_loss"].is_null())
        rec.final_val_loss = get_number(j, "final_val_loss", where);
    if (j.contains("seed") && !j["seed"].is_null())
        rec.seed = static_cast<int>(get_number(j, "seed", where));
    try {
        if (j.contains("status")) rec.status = status_from_string(get_string(j, "status", where));
        if (j.contains("parametrization"))
            rec.parametrization = parametrization_from_string(
                get_string(j, "parametrization", where));
    } catch (const ValidationError& e) {
        std::string prefix = where.empty() ? "" : where + ": ";
        throw ValidationError(prefix + e.what());
    }
    if (j.contains("unique_tokens") && !j["unique_tokens"].is_null())
        rec.unique_tokens = get_number(j, "unique_tokens", where);
    if (j.contains("architecture") && !j["architecture"].is_null())
        rec.architecture = get_string(j, "architecture", where);
    validate(rec, where);
    return rec;
}

json to_json(const GroupKey& key) {
    return json{{"model_name", key.model_name},
                {"n_params", key.n_params},
                {"batch_size_tokens", key.batch_size_tokens},
                {"token_horizon", key.token_horizon},
                {"parametrization", to_string(key.parametrization)}};
}

json to_json(const LossCurveFit& fit) {
    return json{{"type", "loss_curve"},
                {"a", fit.a},
                {"b", fit.b},
                {"c", fit.c},
                {"lr_star", fit.lr_star},
                {"r_squared", fit.r_squared},
                {"n_points", fit.n_points},
                {"extrapolated_minimum", fit.extrapolated_minimum},
                {"lr_min", fit.lr_min},
                {"lr_max", fit.lr_max}};
}

json to_json(const PowerLawFit& fit, std::span<const LrPointD> points) {
    json j{{"type", "power_law"},
           {"B", fit.b},
           {"beta", fit.beta},
           {"d_ref", fit.d_ref},
           {"r_squared", fit.r_squared},
           {"n_points", fit.n_points}};
    if (!points.empty()) {
        json pts = json::array();
        for (const auto& p : points) pts.push_back({{"d", p.d}, {"lr_star", p.lr_star}});
        j["points"] = pts;
    }
    return j;
}

json to_json(const JointLawFit& fit, std::span<const JointPoint> points) {
    json j{{"type", "joint_law"},
           {"C", fit.c},
           {"alpha", fit.alpha},
           {"beta", fit.beta},
           {"n_ref", fit.n_ref},
           {"d_ref", fit.d_ref},
           {"huber_delta", fit.huber_delta},
           {"rmse_train_log10", fit.rmse_train_log10},
           {"rmse_train", fit.rmse_train},
           {"n_points", fit.n_points},
           {"mixed_size_regimes", fit.mixed_size_regimes}};
    j["r_squared_validation"] =
        fit.r_squared_validation ? json(*fit.r_squared_validation) : json(nullptr);
    if (!points.empty()) {
        json pts = json::array();
        for (const auto& p : points)
            pts.push_back({{"n", p.n}, {"d", p.d}, {"lr_star", p.lr_star}});
        j["points"] = pts;
    }
    return j;
}

json to_json(const ParallelSlopesFit& fit) {
    json intercepts = json::object();
    json slopes = json::object();
    for (std::size_t i = 0; i < fit.labels.size(); ++i) {
        intercepts[fit.labels[i]] = fit.intercepts[i];
        slopes[fit.labels[i]] = fit.group_slopes[i];
    }
    return json{{"type", "parallel_slopes"},
                {"shared_slope", fit.shared_slope},
                {"x_ref", fit.x_ref},
                {"intercepts", intercepts},
                {"group_slopes", slopes},
                {"max_slope_deviation", fit.max_slope_deviation},
                {"tolerance", fit.tolerance},
                {"parallel", fit.parallel},
                {"r_squared", fit.r_squared}};
}

json to_json(const BootstrapSummary& summary) {
    return json{{"quantity", summary.quantity},
                {"mean", summary.mean},
                {"std", summary.stddev},
                {"rel_std", summary.rel_std},
                {"n_resamples", summary.n_resamples},
                {"n_failed", summary.n_failed},
                {"rng_seed", summary.rng_seed}};
}

json to_json(const TransferReport& report) {
    json rows = json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"d", r.d},
                        {"measured", r.measured},
                        {"predicted", r.predicted},
                        {"ratio", r.ratio},
                        {"used_in_fit", r.used_in_fit}});
    }
    return json{{"type", "transfer_report"},
                {"rows", rows},
                {"fit", to_json(report.fit)},
                {"max_holdout_rel_error", report.max_holdout_rel_error}};
}

json to_json(const AuditResult& result) {
    return json{{"type", "audit"},
                {"predicted_lr", result.predicted_lr},
                {"used_lr", result.used_lr},
                {"ratio", result.ratio},
                {"threshold", result.threshold},
                {"verdict", to_string(result.verdict)},
                {"message", result.message}};
}

json to_json(const GroupFit& gf) {
    json j{{"group", to_json(gf.group.key)},
           {"n_points", gf.group.points.size()},
           {"fittable", gf.group.fittable()}};
    if (gf.fit) {
        j["fit"] = to_json(*gf.fit);
    } else {
        j["fit"] = nullptr;
        j["error"] = gf.error;
    }
    return j;
}

PowerLawFit power_law_from_json(const json& j) {
    PowerLawFit fit;
    fit.b = get_number(j, "B", "power_law");
    fit.beta = get_number(j, "beta", "power_law");
    fit.d_ref = j.contains("d_ref") ? get_number(j, "d_ref", "power_law") : 1e9;
    if (j.contains("r_squared")) fit.r_squared = get_number(j, "r_squared", "power_law");
    if (j.contains("n_points"))
        fit.n_points = static_cast<int>(get_number(j, "n_points", "power_law"));
    return fit;
}

JointLawFit joint_law_from_json(const json& j) {
    JointLawFit fit;
    fit.c = get_number(j, "C", "joint_law");
    fit.alpha = get_number(j, "alpha", "joint_law");
    fit.beta = get_number(j, "beta", "joint_law");
    fit.n_ref = j.contains("n_ref") ? get_number(j, "n_ref", "joint_law") : 1e9;
    fit.d_ref = j.contains("d_ref") ? get_number(j, "d_ref", "joint_law") : 1e9;
    return fit;
}

namespace {

const json& points_array(const json& j) {
    if (j.is_array()) return j;
    if (j.is_object() && j.contains("points") && j["points"].is_array()) return j["points"];
    throw ValidationError("points input must be an array or an object with a 'points' array");
}

} // namespace

std::vector<LrPointD> lr_points_from_json(const json& j) {
    std::vector<LrPointD> out;
    const json& arr = points_array(j);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        std::string where = "points[" + std::to_string(i) + "]";
        out.push_back({get_number(arr[i], "d", where), get_number(arr[i], "lr_star", where)});
    }
    return out;
}

std::vector<JointPoint> joint_points_from_json(const json& j) {
    std::vector<JointPoint> out;
    const json& arr = points_array(j);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        std::string where = "points[" + std::to_string(i) + "]";
        out.push_back({get_number(arr[i], "n", where), get_number(arr[i], "d", where),
                       get_number(arr[i], "lr_star", where)});
    }
    return out;
}

} // namespace lrhorizon
