#pragma once

// Uncertainty quantification: subsample bootstrap over the full fitting
// pipeline, and simple across-seed statistics.
//
// The bootstrap follows the "remove 20% of the data points" recipe: each
// resample keeps ceil(keep_fraction·n) completed records drawn without
// replacement (classical with-replacement resampling is available behind a
// flag), reruns grouping + quadratic fits (+ the requested scaling-law fit),
// and records the target quantities. Resamples where a fit is infeasible are
// counted in n_failed and excluded, never substituted.
//
// Std convention: population std (divide by n) by default — this is the
// convention that reproduces the published seed-variance numbers — with
// sample std (n−1) behind a flag.

#include <cstdint>
#include <span>
#include <vector>

#include "lrhorizon/curve_fit.hpp"
#include "lrhorizon/records.hpp"

namespace lrhorizon {

struct BootstrapSummary {
    std::string quantity;
    double mean = 0;
    double stddev = 0;
    double rel_std = 0;   // stddev / |mean|
    int n_resamples = 0;
    int n_failed = 0;     // resamples where this quantity had no feasible fit
    std::uint64_t rng_seed = 0;
};

enum class BootstrapTarget {
    lr_star_per_horizon,  // LR* of each sweep group
    power_law_constants,  // B, beta, r_squared per family
    joint_law_constants,  // C, alpha, beta across families
};

enum class ResampleScope {
    global,    // subsample the pooled record list
    per_group, // subsample within each sweep group independently
};

struct BootstrapOptions {
    double keep_fraction = 0.8;
    int n_resamples = 1000;
    std::uint64_t rng_seed = 0;
    bool with_replacement = false;
    ResampleScope scope = ResampleScope::global;
    bool sample_std = false;           // population std by default
    bool exclude_extrapolated = true;  // drop fits whose LR* left the sampled range
    int jobs = 1;                      // resamples run in parallel; results identical
};

/// One summary per target quantity. Records are canonically sorted before
/// index-based resampling, so summaries do not depend on input order; each
/// resample derives its RNG stream from (rng_seed, resample index), so
/// parallel and serial execution are bit-identical.
std::vector<BootstrapSummary> bootstrap(std::span<const RunRecord> records,
                                        BootstrapTarget target,
                                        const BootstrapOptions& opts = {});

/// Mean/std/relative std of LR* across seed replicates (≥ 2 values).
BootstrapSummary seed_stats(std::span<const double> lr_stars, bool sample_std = false);
BootstrapSummary seed_stats(std::span<const LossCurveFit> fits, bool sample_std = false);

} // namespace lrhorizon
