#pragma once

// JSON shapes for fit results and reports. These are the documented external
// interface: every fit serializes to an object carrying its constants,
// reference scales, metrics and the input points it was fitted on.

#include <nlohmann/json_fwd.hpp>

#include "lrhorizon/curve_fit.hpp"
#include "lrhorizon/pipeline.hpp"
#include "lrhorizon/records.hpp"
#include "lrhorizon/scaling_laws.hpp"
#include "lrhorizon/transfer.hpp"
#include "lrhorizon/uncertainty.hpp"

namespace lrhorizon {

nlohmann::json to_json(const RunRecord& rec);
RunRecord record_from_json(const nlohmann::json& j, const std::string& where = {});

nlohmann::json to_json(const GroupKey& key);
nlohmann::json to_json(const LossCurveFit& fit);
nlohmann::json to_json(const PowerLawFit& fit, std::span<const LrPointD> points = {});
nlohmann::json to_json(const JointLawFit& fit, std::span<const JointPoint> points = {});
nlohmann::json to_json(const ParallelSlopesFit& fit);
nlohmann::json to_json(const BootstrapSummary& summary);
nlohmann::json to_json(const TransferReport& report);
nlohmann::json to_json(const AuditResult& result);
nlohmann::json to_json(const GroupFit& gf);

PowerLawFit power_law_from_json(const nlohmann::json& j);
JointLawFit joint_law_from_json(const nlohmann::json& j);

/// Points files: {"points": [{"d": ..., "lr_star": ...}, ...]} — objects may
/// also carry "n" for joint-law points. A bare array is accepted too.
std::vector<LrPointD> lr_points_from_json(const nlohmann::json& j);
std::vector<JointPoint> joint_points_from_json(const nlohmann::json& j);

} // namespace lrhorizon
