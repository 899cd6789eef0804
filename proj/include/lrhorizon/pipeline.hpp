#pragma once

// Glue between the data model and the fitters: run quadratic fits over all
// sweep groups and collect per-family LR* points for the scaling laws.
// A "family" is everything that shares a law: model, batch size and
// parametrization; its horizons are the x-axis.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrhorizon/curve_fit.hpp"
#include "lrhorizon/records.hpp"
#include "lrhorizon/scaling_laws.hpp"

namespace lrhorizon {

struct GroupFit {
    SweepGroup group;
    std::optional<LossCurveFit> fit; // empty when unfittable or non-convex
    std::string error;               // reason when fit is empty
};

/// Quadratic fit over every group; unfittable/non-convex groups are reported,
/// not fatal.
std::vector<GroupFit> fit_sweeps(const std::vector<RunRecord>& records);
std::vector<GroupFit> fit_sweeps(const std::vector<SweepGroup>& groups);

struct FamilyKey {
    std::string model_name;
    double n_params = 0;
    double batch_size_tokens = 0;
    Parametrization parametrization = Parametrization::standard;

    bool operator==(const FamilyKey&) const = default;
    bool operator<(const FamilyKey& o) const;
    std::string label() const;
};

FamilyKey family_of(const GroupKey& key);

/// LR* points per family, horizon-ordered. Extrapolated minimizers (LR*
/// outside the sampled range) are dropped when exclude_extrapolated is set;
/// they are exactly the estimates the quadratic fit cannot vouch for.
std::map<FamilyKey, std::vector<LrPointD>>
lr_star_by_family(std::span<const GroupFit> fits, bool exclude_extrapolated = false);

/// Flattened (N, D, LR*) points for the joint law.
std::vector<JointPoint> joint_points(std::span<const GroupFit> fits,
                                     bool exclude_extrapolated = false);

} // namespace lrhorizon
