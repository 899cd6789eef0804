#include "lrhorizon/pipeline.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

#include "lrhorizon/errors.hpp"

namespace lrhorizon {

bool FamilyKey::operator<(const FamilyKey& o) const {
    return std::tie(n_params, model_name, batch_size_tokens, parametrization) <
           std::tie(o.n_params, o.model_name, o.batch_size_tokens, o.parametrization);
}

std::string FamilyKey::label() const {
    std::ostringstream os;
    os << model_name << "[bs=" << batch_size_tokens;
    if (parametrization == Parametrization::muP) os << ",muP";
    os << "]";
    return os.str();
}

FamilyKey family_of(const GroupKey& key) {
    return {key.model_name, key.n_params, key.batch_size_tokens, key.parametrization};
}

std::vector<GroupFit> fit_sweeps(const std::vector<SweepGroup>& groups) {
    std::vector<GroupFit> out;
    out.reserve(groups.size());
    for (const auto& g : groups) {
        GroupFit gf;
        gf.group = g;
        if (!g.fittable()) {
            std::ostringstream os;
            os << "unfittable: " << g.points.size() << " distinct learning rate(s)";
            gf.error = os.str();
        } else {
            try {
                gf.fit = fit_quadratic(g);
            } catch (const Error& e) {
                gf.error = e.what();
            }
        }
        out.push_back(std::move(gf));
    }
    return out;
}

std::vector<GroupFit> fit_sweeps(const std::vector<RunRecord>& records) {
    return fit_sweeps(group(records));
}

std::map<FamilyKey, std::vector<LrPointD>>
lr_star_by_family(std::span<const GroupFit> fits, bool exclude_extrapolated) {
    std::map<FamilyKey, std::vector<LrPointD>> out;
    for (const auto& gf : fits) {
        if (!gf.fit) continue;
        if (exclude_extrapolated && gf.fit->extrapolated_minimum) continue;
        out[family_of(gf.group.key)].push_back({gf.group.key.token_horizon, gf.fit->lr_star});
    }
    for (auto& [key, pts] : out)
        std::sort(pts.begin(), pts.end(),
                  [](const LrPointD& a, const LrPointD& b) { return a.d < b.d; });
    return out;
}

std::vector<JointPoint> joint_points(std::span<const GroupFit> fits,
                                     bool exclude_extrapolated) {
    std::vector<JointPoint> out;
    for (const auto& gf : fits) {
        if (!gf.fit) continue;
        if (exclude_extrapolated && gf.fit->extrapolated_minimum) continue;
        out.push_back({gf.group.key.n_params, gf.group.key.token_horizon, gf.fit->lr_star});
    }
    return out;
}

} // namespace lrhorizon
