#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "lrhorizon/errors.hpp"
#include "lrhorizon/pipeline.hpp"
#include "lrhorizon/rng.hpp"
#include "lrhorizon/scaling_laws.hpp"
#include "lrhorizon/synth.hpp"

using namespace lrhorizon;

namespace {

// Sweep table for the 50m model: measured optimal LR per horizon.
const std::vector<LrPointD> k50mPoints = {
    {25e9, 1.54e-3}, {50e9, 9.79e-4}, {100e9, 6.06e-4},
    {200e9, 3.33e-4}, {400e9, 2.14e-4}, {800e9, 1.71e-4}};

std::vector<LrPointD> first_three(const std::vector<LrPointD>& pts) {
    return {pts.begin(), pts.begin() + 3};
}

} // namespace

TEST_CASE("50m short-horizon fit predicts the long horizons") {
    auto fit = fit_power_law(first_three(k50mPoints));
    CHECK(fit.r_squared > 0.99);
    CHECK(predict_lr(fit, 200e9) == doctest::Approx(3.81e-4).epsilon(0.01));
    CHECK(predict_lr(fit, 400e9) == doctest::Approx(2.39e-4).epsilon(0.01));
    CHECK(predict_lr(fit, 800e9) == doctest::Approx(1.50e-4).epsilon(0.01));
}

TEST_CASE("two exact points interpolate with r_squared 1") {
    std::vector<LrPointD> pts = {{1e9, 1e-3}, {4e9, 5e-4}}; // beta = 0.5
    auto fit = fit_power_law(pts);
    CHECK(fit.beta == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit.b == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0));
}

TEST_CASE("all six 50m points give the published exponent") {
    auto fit = fit_power_law(k50mPoints);
    CHECK(std::abs(fit.beta - 0.7029) / 0.7029 < 0.10);
    CHECK(fit.r_squared >= 0.98);
}

TEST_CASE("power-law fit input validation") {
    std::vector<LrPointD> one_d = {{1e9, 1e-3}, {1e9, 2e-3}};
    CHECK_THROWS_AS(fit_power_law(one_d), UnfittableError);
    std::vector<LrPointD> negative = {{1e9, 1e-3}, {2e9, -1e-3}};
    CHECK_THROWS_AS(fit_power_law(negative), ValidationError);
}

TEST_CASE("rescaling horizons leaves the exponent fixed and scales B") {
    auto eng = rng::make_engine({5, 5});
    for (int trial = 0; trial < 50; ++trial) {
        double k = std::pow(10.0, 4 * rng::uniform01(eng) - 2);
        auto base = fit_power_law(k50mPoints);
        std::vector<LrPointD> scaled;
        for (auto p : k50mPoints) scaled.push_back({k * p.d, p.lr_star});
        auto refit = fit_power_law(scaled);
        CHECK(std::abs(refit.beta - base.beta) <= 1e-9);
        CHECK(refit.b == doctest::Approx(base.b * std::pow(k, base.beta)).epsilon(1e-9));
    }
}

TEST_CASE("beta estimates on noisy power-law data are unbiased") {
    // многие independent datasets; the mean estimate must sit within the
    // monte-carlo error of the plant.
    auto eng = rng::make_engine({99, 1});
    const double beta_true = 0.32, b_true = 1e-3;
    std::vector<double> betas;
    for (int rep = 0; rep < 300; ++rep) {
        std::vector<LrPointD> pts;
        for (double d : {25e9, 50e9, 100e9, 200e9, 400e9}) {
            double lr = b_true * std::pow(d / 1e9, -beta_true) *
                        std::pow(10.0, 0.01 * rng::gaussian(eng));
            pts.push_back({d, lr});
        }
        betas.push_back(fit_power_law(pts).beta);
    }
    double mean = 0;
    for (double b : betas) mean += b;
    mean /= static_cast<double>(betas.size());
    double var = 0;
    for (double b : betas) var += (b - mean) * (b - mean);
    var /= static_cast<double>(betas.size());
    double se = std::sqrt(var / static_cast<double>(betas.size()));
    CHECK(std::abs(mean - beta_true) < 3.0 * se);
}

TEST_CASE("joint prediction at the published constants") {
    JointLawFit fit;
    fit.c = 1.55e-3;
    fit.alpha = 0.23;
    fit.beta = 0.32;
    CHECK(predict_lr(fit, 7e9, 1e12) == doctest::Approx(1.1e-4).epsilon(0.02));
    CHECK(predict_lr(fit, 1e9, 1e9) == doctest::Approx(1.55e-3));
    CHECK_THROWS_AS(predict_lr(fit, -1, 1e12), ValidationError);
}

TEST_CASE("7B-style extrapolation to 1T tokens") {
    std::vector<LrPointD> pts = {{25e9, 3.4e-4}, {50e9, 2.8e-4}, {100e9, 2.3e-4}};
    auto fit = fit_power_law(pts);
    CHECK(predict_lr(fit, 1e12) == doctest::Approx(1.15e-4).epsilon(0.10));
}

TEST_CASE("joint law recovers noiseless plants to 0.5%") {
    SurfaceSpec spec; // defaults are the published constants
    SynthGrid grid{{0.76e9, 1.3e9, 2.7e9},
                   {25e9, 50e9, 100e9, 200e9},
                   {0.25, 0.5, 1.0, 2.0, 4.0}};
    auto fits = fit_sweeps(generate(spec, grid));
    auto pts = joint_points(fits);
    REQUIRE(pts.size() == 12);
    auto law = fit_joint_law(pts);
    CHECK(std::abs(law.c - spec.c) / spec.c < 0.005);
    CHECK(std::abs(law.alpha - spec.alpha) / spec.alpha < 0.005);
    CHECK(std::abs(law.beta - spec.beta) / spec.beta < 0.005);
    CHECK(law.rmse_train_log10 < 1e-6);
    CHECK(!law.mixed_size_regimes); // all three models are >= 760M
}

TEST_CASE("alpha-free plants reduce to the one-dimensional law") {
    SurfaceSpec spec;
    spec.alpha = 0.0;
    spec.beta = 0.4;
    SynthGrid grid{{0.76e9, 1.3e9, 2.7e9},
                   {25e9, 50e9, 100e9, 200e9},
                   {0.5, 1.0, 2.0}};
    auto fits = fit_sweeps(generate(spec, grid));
    auto pts = joint_points(fits);
    auto law = fit_joint_law(pts);
    CHECK(std::abs(law.alpha) < 1e-3);

    std::map<FamilyKey, std::vector<LrPointD>> families = lr_star_by_family(fits);
    auto power = fit_power_law(families.begin()->second);
    CHECK(law.beta == doctest::Approx(power.beta).epsilon(1e-6));
}

TEST_CASE("degenerate spans are rejected with the missing dimension named") {
    std::vector<JointPoint> same_n = {
        {1e9, 25e9, 1e-3}, {1e9, 50e9, 8e-4}, {1e9, 100e9, 6e-4}};
    CHECK_THROWS_WITH_AS(fit_joint_law(same_n), doctest::Contains("model size"),
                         UnfittableError);
    std::vector<JointPoint> same_d = {
        {0.5e9, 25e9, 1e-3}, {1e9, 25e9, 8e-4}, {2e9, 25e9, 6e-4}};
    CHECK_THROWS_WITH_AS(fit_joint_law(same_d), doctest::Contains("horizon"),
                         UnfittableError);
}

TEST_CASE("joint fit is permutation invariant bit for bit") {
    SurfaceSpec spec;
    spec.noise_sigma = 2e-3;
    spec.rng_seed = 31;
    SynthGrid grid{{0.76e9, 1.3e9, 2.7e9},
                   {25e9, 50e9, 100e9, 200e9},
                   {0.25, 0.5, 1.0, 2.0, 4.0}};
    auto pts = joint_points(fit_sweeps(generate(spec, grid)));
    auto law_a = fit_joint_law(pts);

    auto eng = rng::make_engine({17, 8});
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(pts.begin(), pts.end(), eng);
        auto law_b = fit_joint_law(pts);
        CHECK(law_a.c == law_b.c);
        CHECK(law_a.alpha == law_b.alpha);
        CHECK(law_a.beta == law_b.beta);
    }
}

TEST_CASE("holdout validation r_squared is reported") {
    SurfaceSpec spec;
    SynthGrid grid{{0.76e9, 1.3e9, 2.7e9},
                   {25e9, 50e9, 100e9, 200e9},
                   {0.5, 1.0, 2.0}};
    auto pts = joint_points(fit_sweeps(generate(spec, grid)));
    std::vector<JointPoint> holdout;
    for (double d : {25e9, 50e9, 100e9})
        holdout.push_back({7e9, d, spec.planted_lr_star(7e9, d)});
    auto law = fit_joint_law(pts, holdout);
    REQUIRE(law.r_squared_validation.has_value());
    CHECK(*law.r_squared_validation == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("analytic gradient of the joint objective matches finite differences") {
    std::vector<JointPoint> pts = {{0.76e9, 25e9, 1.1e-3}, {1.3e9, 50e9, 7.2e-4},
                                   {2.7e9, 100e9, 4.4e-4}, {0.76e9, 200e9, 5.3e-4},
                                   {2.7e9, 25e9, 6.8e-4}};
    const double delta = 1e-3;
    std::array<double, 3> theta = {-2.9, 0.21, 0.33};
    std::array<double, 3> grad{};
    joint_law_objective(pts, theta[0], theta[1], theta[2], delta, grad);
    const double h = 1e-7;
    for (int k = 0; k < 3; ++k) {
        auto up = theta, dn = theta;
        up[k] += h;
        dn[k] -= h;
        double fu = joint_law_objective(pts, up[0], up[1], up[2], delta, {});
        double fd = joint_law_objective(pts, dn[0], dn[1], dn[2], delta, {});
        double fd_grad = (fu - fd) / (2 * h);
        CHECK(grad[k] == doctest::Approx(fd_grad).epsilon(1e-5));
    }
}

TEST_CASE("predictions decrease monotonically in N and D") {
    JointLawFit fit;
    fit.c = 1.55e-3;
    fit.alpha = 0.23;
    fit.beta = 0.32;
    auto eng = rng::make_engine({3, 14});
    for (int trial = 0; trial < 100; ++trial) {
        double n = std::pow(10.0, 8 + 2 * rng::uniform01(eng));
        double d = std::pow(10.0, 9 + 3 * rng::uniform01(eng));
        double f = 1.0 + 10 * rng::uniform01(eng);
        CHECK(predict_lr(fit, n * f, d) < predict_lr(fit, n, d));
        CHECK(predict_lr(fit, n, d * f) < predict_lr(fit, n, d));
    }
}

TEST_CASE("parallel slopes: exact plants share the slope") {
    std::map<std::string, std::vector<XYPoint>> groups;
    for (double d : {25e9, 50e9, 100e9, 200e9}) {
        double base = 1e-3 * std::pow(d / 1e9, -0.32);
        groups["g1"].push_back({d, base});
        groups["g2"].push_back({d, 2.0 * base});
    }
    auto fit = fit_parallel_slopes(groups);
    CHECK(fit.shared_slope == doctest::Approx(-0.32).epsilon(1e-9));
    CHECK(fit.max_slope_deviation < 1e-9);
    CHECK(fit.parallel);
    // intercept gap is the log of the planted factor
    CHECK(fit.intercepts[1] - fit.intercepts[0] == doctest::Approx(std::log10(2.0)).epsilon(1e-9));
}

TEST_CASE("parallel slopes: batch-size factorized surfaces verdict parallel") {
    // two batch sizes generated from factorized plants f(BS) * D^-beta
    SurfaceSpec small_bs;
    small_bs.alpha = 0;
    small_bs.c = 2e-3;
    small_bs.batch_size_tokens = 0.5e6;
    SurfaceSpec big_bs = small_bs;
    big_bs.c = 3.2e-3; // f(1M)/f(0.5M) = 1.6
    big_bs.batch_size_tokens = 1e6;
    SynthGrid grid{{1.3e9}, {25e9, 50e9, 100e9}, {0.5, 1.0, 2.0}};

    std::map<std::string, std::vector<XYPoint>> groups;
    for (const auto& [spec, label] :
         {std::pair{&small_bs, "bs=0.5M"}, std::pair{&big_bs, "bs=1M"}}) {
        auto fits = fit_sweeps(generate(*spec, grid));
        for (const auto& [family, pts] : lr_star_by_family(fits))
            for (const auto& p : pts) groups[label].push_back({p.d, p.lr_star});
    }
    auto fit = fit_parallel_slopes(groups);
    CHECK(fit.parallel);
    CHECK(fit.shared_slope == doctest::Approx(-0.32).epsilon(1e-6));
    CHECK(fit.intercepts[1] - fit.intercepts[0] ==
          doctest::Approx(std::log10(1.6)).epsilon(1e-6));
}

TEST_CASE("parallel slopes: diverging exponents fail the verdict") {
    std::map<std::string, std::vector<XYPoint>> groups;
    for (double d : {25e9, 50e9, 100e9, 200e9}) {
        groups["shallow"].push_back({d, 1e-3 * std::pow(d / 1e9, -0.32)});
        groups["steep"].push_back({d, 5e-3 * std::pow(d / 1e9, -0.70)});
    }
    auto fit = fit_parallel_slopes(groups);
    CHECK(!fit.parallel);
    CHECK(fit.max_slope_deviation == doctest::Approx(0.38).epsilon(1e-6));
}

TEST_CASE("parallel slopes: undersized groups are named") {
    std::map<std::string, std::vector<XYPoint>> groups;
    groups["ok"] = {{25e9, 1e-3}, {50e9, 8e-4}};
    groups["tiny"] = {{25e9, 1e-3}};
    CHECK_THROWS_WITH_AS(fit_parallel_slopes(groups), doctest::Contains("tiny"),
                         UnfittableError);
}

TEST_CASE("single group parallel fit matches the power law") {
    std::map<std::string, std::vector<XYPoint>> groups;
    std::vector<LrPointD> pts;
    for (double d : {25e9, 50e9, 100e9}) {
        double lr = 9e-4 * std::pow(d / 1e9, -0.41) * (1.0 + 0.01 * std::sin(d));
        groups["only"].push_back({d, lr});
        pts.push_back({d, lr});
    }
    auto shared = fit_parallel_slopes(groups);
    auto power = fit_power_law(pts);
    CHECK(shared.shared_slope == doctest::Approx(-power.beta).epsilon(1e-12));
    CHECK(shared.intercepts[0] == doctest::Approx(std::log10(power.b)).epsilon(1e-12));
    CHECK(shared.max_slope_deviation == 0.0);
}

TEST_CASE("separability: slopes over D-groups and N-groups match the joint fit") {
    SurfaceSpec spec;
    SynthGrid grid{{0.76e9, 1.3e9, 2.7e9},
                   {25e9, 50e9, 100e9, 200e9},
                   {0.5, 1.0, 2.0}};
    auto fits = fit_sweeps(generate(spec, grid));
    auto law = fit_joint_law(joint_points(fits));

    std::map<std::string, std::vector<XYPoint>> d_groups; // x = D, one group per N
    std::map<std::string, std::vector<XYPoint>> n_groups; // x = N, one group per D
    for (const auto& gf : fits) {
        REQUIRE(gf.fit.has_value());
        const auto& key = gf.group.key;
        d_groups["N=" + std::to_string(key.n_params)].push_back(
            {key.token_horizon, gf.fit->lr_star});
        n_groups["D=" + std::to_string(key.token_horizon)].push_back(
            {key.n_params, gf.fit->lr_star});
    }
    auto beta_fit = fit_parallel_slopes(d_groups);
    auto alpha_fit = fit_parallel_slopes(n_groups);
    CHECK(beta_fit.parallel);
    CHECK(alpha_fit.parallel);
    CHECK(std::abs(-beta_fit.shared_slope - law.beta) / law.beta < 0.005);
    CHECK(std::abs(-alpha_fit.shared_slope - law.alpha) / law.alpha < 0.005);
}
