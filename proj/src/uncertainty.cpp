#include "lrhorizon/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "lrhorizon/errors.hpp"
#include "lrhorizon/pipeline.hpp"
#include "lrhorizon/rng.hpp"
#include "lrhorizon/scaling_laws.hpp"

namespace lrhorizon {

namespace {

// Stream-id tag so bootstrap draws never collide with other users of the
// shared mix() scheme.
constexpr std::uint64_t kBootstrapTag = 0xb005ull;

struct Moments {
    double mean = 0;
    double stddev = 0;
};

Moments moments(const std::vector<double>& values, bool sample_std) {
    Moments m;
    const double n = static_cast<double>(values.size());
    for (double v : values) m.mean += v;
    m.mean /= n;
    double ss = 0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    if (values.size() > 1 || !sample_std)
        m.stddev = std::sqrt(ss / (sample_std ? n - 1 : n));
    return m;
}

std::string quantity_label(const char* name, const FamilyKey& family,
                           std::optional<double> horizon = {}) {
    std::ostringstream os;
    os << name << "(" << family.label();
    if (horizon) os << ",D=" << *horizon;
    os << ")";
    return os.str();
}

// Quantities measured on one record subset; missing entries mean the fit was
// infeasible for that resample.
using QuantityMap = std::map<std::string, double>;

QuantityMap measure(const std::vector<RunRecord>& subset, BootstrapTarget target,
                    const BootstrapOptions& opts) {
    QuantityMap out;
    auto fits = fit_sweeps(subset);
    if (target == BootstrapTarget::lr_star_per_horizon) {
        for (const auto& gf : fits) {
            if (!gf.fit) continue;
            if (opts.exclude_extrapolated && gf.fit->extrapolated_minimum) continue;
            out[quantity_label("lr_star", family_of(gf.group.key),
                               gf.group.key.token_horizon)] = gf.fit->lr_star;
        }
        return out;
    }
    if (target == BootstrapTarget::power_law_constants) {
        for (const auto& [family, pts] : lr_star_by_family(fits, opts.exclude_extrapolated)) {
            std::set<double> horizons;
            for (const auto& p : pts) horizons.insert(p.d);
            if (horizons.size() < 2) continue;
            try {
                auto law = fit_power_law(pts);
                out[quantity_label("B", family)] = law.b;
                out[quantity_label("beta", family)] = law.beta;
                out[quantity_label("r_squared", family)] = law.r_squared;
            } catch (const Error&) {
                // infeasible on this resample
            }
        }
        return out;
    }
    // joint_law_constants
    auto pts = joint_points(fits, opts.exclude_extrapolated);
    try {
        auto law = fit_joint_law(pts);
        out["C(joint)"] = law.c;
        out["alpha(joint)"] = law.alpha;
        out["beta(joint)"] = law.beta;
    } catch (const Error&) {
    }
    return out;
}

std::vector<std::size_t> draw_indices(std::mt19937_64& eng, std::size_t n,
                                      double keep_fraction, bool with_replacement) {
    auto k = static_cast<std::size_t>(std::ceil(keep_fraction * static_cast<double>(n)));
    k = std::min(k, n);
    if (k == 0) k = 1;
    return with_replacement ? rng::sample_with_replacement(eng, n, k)
                            : rng::sample_without_replacement(eng, n, k);
}

std::vector<RunRecord> resample(const std::vector<RunRecord>& pool,
                                const std::vector<std::vector<std::size_t>>& group_index,
                                const BootstrapOptions& opts, int resample_id) {
    auto eng = rng::make_engine({opts.rng_seed, kBootstrapTag,
                                 static_cast<std::uint64_t>(resample_id)});
    std::vector<RunRecord> subset;
    if (opts.scope == ResampleScope::global) {
        for (std::size_t i : draw_indices(eng, pool.size(), opts.keep_fraction,
                                          opts.with_replacement))
            subset.push_back(pool[i]);
    } else {
        for (const auto& members : group_index) {
            for (std::size_t i : draw_indices(eng, members.size(), opts.keep_fraction,
                                              opts.with_replacement))
                subset.push_back(pool[members[i]]);
        }
    }
    return subset;
}

} // namespace

std::vector<BootstrapSummary> bootstrap(std::span<const RunRecord> records,
                                        BootstrapTarget target,
                                        const BootstrapOptions& opts) {
    if (!(opts.keep_fraction > 0) || opts.keep_fraction > 1.0)
        throw ValidationError("bootstrap: keep_fraction must be in (0, 1]");
    if (opts.n_resamples < 1)
        throw ValidationError("bootstrap: n_resamples must be at least 1");

    // Resampling pool: completed runs only, in canonical order, so results
    // are independent of input order.
    std::vector<RunRecord> pool;
    for (const auto& rec : records)
        if (rec.status == RunStatus::completed) pool.push_back(rec);
    if (pool.empty()) throw ValidationError("bootstrap: no completed records");
    sort_canonical(pool);

    // Full-data pass defines the universe of expected quantities.
    BootstrapOptions full = opts;
    auto expected = measure(pool, target, full);
    if (expected.empty())
        throw UnfittableError("bootstrap: the full dataset does not support the "
                              "requested target fit; nothing to resample");

    std::vector<std::vector<std::size_t>> group_index;
    if (opts.scope == ResampleScope::per_group) {
        std::map<GroupKey, std::vector<std::size_t>> by_key;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            const auto& r = pool[i];
            by_key[{r.model_name, r.n_params, r.batch_size_tokens, r.token_horizon,
                    r.parametrization}]
                .push_back(i);
        }
        for (auto& [key, members] : by_key) group_index.push_back(std::move(members));
    }

    std::vector<QuantityMap> per_resample(opts.n_resamples);
    auto run_range = [&](int begin, int end) {
        for (int i = begin; i < end; ++i)
            per_resample[i] = measure(resample(pool, group_index, opts, i), target, opts);
    };
    int jobs = std::max(1, opts.jobs);
    if (jobs == 1 || opts.n_resamples < 2) {
        run_range(0, opts.n_resamples);
    } else {
        std::vector<std::thread> threads;
        int per = (opts.n_resamples + jobs - 1) / jobs;
        for (int begin = 0; begin < opts.n_resamples; begin += per)
            threads.emplace_back(run_range, begin, std::min(begin + per, opts.n_resamples));
        for (auto& t : threads) t.join();
    }

    std::vector<BootstrapSummary> summaries;
    bool any_success = false;
    for (const auto& [label, point_estimate] : expected) {
        std::vector<double> values;
        values.reserve(per_resample.size());
        for (const auto& qm : per_resample) {
            auto it = qm.find(label);
            if (it != qm.end()) values.push_back(it->second);
        }
        BootstrapSummary s;
        s.quantity = label;
        s.n_resamples = opts.n_resamples;
        s.n_failed = opts.n_resamples - static_cast<int>(values.size());
        s.rng_seed = opts.rng_seed;
        if (!values.empty()) {
            any_success = true;
            auto m = moments(values, opts.sample_std);
            s.mean = m.mean;
            s.stddev = m.stddev;
            s.rel_std = m.mean != 0 ? m.stddev / std::abs(m.mean) : 0.0;
        }
        summaries.push_back(std::move(s));
    }
    if (!any_success)
        throw FitError("bootstrap: all resamples failed to produce a feasible fit");
    return summaries;
}

BootstrapSummary seed_stats(std::span<const double> lr_stars, bool sample_std) {
    if (lr_stars.size() < 2)
        throw ValidationError("seed_stats needs at least 2 values");
    BootstrapSummary s;
    s.quantity = "lr_star";
    auto m = moments(std::vector<double>(lr_stars.begin(), lr_stars.end()), sample_std);
    s.mean = m.mean;
    s.stddev = m.stddev;
    s.rel_std = m.mean != 0 ? m.stddev / std::abs(m.mean) : 0.0;
    s.n_resamples = static_cast<int>(lr_stars.size());
    return s;
}

BootstrapSummary seed_stats(std::span<const LossCurveFit> fits, bool sample_std) {
    std::vector<double> values;
    values.reserve(fits.size());
    for (const auto& f : fits) values.push_back(f.lr_star);
    return seed_stats(values, sample_std);
}

} // namespace lrhorizon
