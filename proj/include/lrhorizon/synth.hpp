#pragma once

// Synthetic sweep generator: inverts the joint law into loss surfaces with a
// known ("planted") optimum per (N, D) cell, so every fitter in this library
// can be checked against ground truth. With noise_sigma = 0 the planted
// minimizer is exact.

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "lrhorizon/records.hpp"

namespace lrhorizon {

struct SurfaceSpec {
    // planted law LR*(N, D) = c · (N/n_ref)^(−alpha) · (D/d_ref)^(−beta)
    double c = 1.55e-3;
    double alpha = 0.23;
    double beta = 0.32;
    double n_ref = 1e9;
    double d_ref = 1e9;

    // loss(N, D, lr) = floor(N, D) + a(D)·(log10 lr − log10 LR*)² + noise
    // with a(D) = curvature · (D/d_ref)^(−curvature_decay); a positive decay
    // makes parabolas flatten at longer horizons. The default curvature makes
    // a 2.6x LR error cost about 0.009 loss.
    double curvature = 0.05;
    double curvature_decay = 0.0;
    std::function<double(double n, double d)> floor_loss; // default: constant 2.5
    double noise_sigma = 0.0;

    // runs at lr > divergence_lr_multiple · LR* are emitted as diverged
    double divergence_lr_multiple = std::numeric_limits<double>::infinity();

    std::uint64_t rng_seed = 0;
    double batch_size_tokens = 524288;
    std::string model_name_prefix = "synth";

    double planted_lr_star(double n, double d) const;
    double curvature_at(double d) const;
    double floor_at(double n, double d) const;
};

struct SynthGrid {
    std::vector<double> n_values;
    std::vector<double> d_values;
    std::vector<double> lr_multipliers; // LRs = multiplier · planted LR*
};

/// One record per (N, D, multiplier). Noise streams are derived from
/// (rng_seed, N index, D index, LR index), so output is deterministic and
/// cell-independent. Diverged records carry no loss.
std::vector<RunRecord> generate(const SurfaceSpec& spec, const SynthGrid& grid);

} // namespace lrhorizon
