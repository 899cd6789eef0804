#include "lrhorizon/synth.hpp"

#include <cmath>
#include <sstream>

#include "lrhorizon/errors.hpp"
#include "lrhorizon/rng.hpp"

namespace lrhorizon {

namespace {
constexpr std::uint64_t kSynthTag = 0x5e47ull;
}

double SurfaceSpec::planted_lr_star(double n, double d) const {
    return c * std::pow(n / n_ref, -alpha) * std::pow(d / d_ref, -beta);
}

double SurfaceSpec::curvature_at(double d) const {
    return curvature * std::pow(d / d_ref, -curvature_decay);
}

double SurfaceSpec::floor_at(double n, double d) const {
    return floor_loss ? floor_loss(n, d) : 2.5;
}

std::vector<RunRecord> generate(const SurfaceSpec& spec, const SynthGrid& grid) {
    if (grid.n_values.empty() || grid.d_values.empty() || grid.lr_multipliers.empty())
        throw ValidationError("synth grid must have at least one N, one D and one multiplier");
    if (!(spec.c > 0) || !(spec.n_ref > 0) || !(spec.d_ref > 0))
        throw ValidationError("synth surface constants must be positive");
    if (!(spec.curvature > 0))
        throw ValidationError("synth curvature must be positive");
    for (double n : grid.n_values)
        if (!(n > 0)) throw ValidationError("synth grid N values must be positive");
    for (double d : grid.d_values)
        if (!(d > 0)) throw ValidationError("synth grid D values must be positive");
    for (double m : grid.lr_multipliers)
        if (!(m > 0)) throw ValidationError("synth LR multipliers must be positive");

    std::vector<RunRecord> records;
    records.reserve(grid.n_values.size() * grid.d_values.size() * grid.lr_multipliers.size());
    for (std::size_t i = 0; i < grid.n_values.size(); ++i) {
        const double n = grid.n_values[i];
        std::ostringstream name;
        name << spec.model_name_prefix << "-" << n / 1e9 << "b";
        for (std::size_t j = 0; j < grid.d_values.size(); ++j) {
            const double d = grid.d_values[j];
            const double lr_star = spec.planted_lr_star(n, d);
            const double a = spec.curvature_at(d);
            const double floor = spec.floor_at(n, d);
            if (!(floor > 0))
                throw ValidationError("synth floor loss must be positive");
            for (std::size_t k = 0; k < grid.lr_multipliers.size(); ++k) {
                const double mult = grid.lr_multipliers[k];
                RunRecord rec;
                rec.model_name = name.str();
                rec.n_params = n;
                rec.batch_size_tokens = spec.batch_size_tokens;
                rec.token_horizon = d;
                rec.max_lr = mult * lr_star;
                if (mult > spec.divergence_lr_multiple) {
                    rec.status = RunStatus::diverged;
                } else {
                    double dx = std::log10(mult); // log10(lr) − log10(lr_star)
                    double loss = floor + a * dx * dx;
                    if (spec.noise_sigma > 0) {
                        auto eng = rng::make_engine({spec.rng_seed, kSynthTag,
                                                     static_cast<std::uint64_t>(i),
                                                     static_cast<std::uint64_t>(j),
                                                     static_cast<std::uint64_t>(k)});
                        loss += spec.noise_sigma * rng::gaussian(eng);
                        if (!(loss > 0))
                            throw ValidationError("synth noise drove a loss non-positive; "
                                                  "lower noise_sigma or raise the floor");
                    }
                    rec.final_val_loss = loss;
                }
                records.push_back(std::move(rec));
            }
        }
    }
    return records;
}

} // namespace lrhorizon
