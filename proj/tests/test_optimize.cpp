// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "noiselab/config.hpp"
#include "noiselab/errors.hpp"
#include "noiselab/optimize.hpp"
#include "noiselab/rng.hpp"
#include "noiselab/stability.hpp"
#include "oracles.hpp"

using namespace noiselab;

namespace {

RoundTripFn constant_target(NoiseVector target) {
    return [target](const NoiseVector&) { return target; };
}

RoundTripFn identity_trip() {
    return [](const NoiseVector& e) { return e; };
}

}  // namespace

TEST_CASE("cosine loss endpoints") {
    CHECK(cosine_loss({1.0, 2.0}, {1.0, 2.0}) == 0.0);
    CHECK(cosine_loss({1.0, 2.0}, {-1.0, -2.0}) == 2.0);
    CHECK(cosine_loss({1.0, 0.0}, {0.0, 1.0}) == 1.0);
    CHECK_THROWS_AS(cosine_loss({0.0, 0.0}, {1.0, 0.0}), DegenerateInputError);
}

TEST_CASE("gradient vanishes along the ray eps = c * eps_prime") {
    const NoiseVector ep = {0.4, -1.2, 2.0};
    for (double c : {1.0, 0.2, 7.0}) {
        const NoiseVector g = cosine_loss_grad(scaled(ep, c), ep);
        for (double gi : g) {
            CHECK(std::fabs(gi) < 1e-15);
        }
    }
}

TEST_CASE("unit-norm orthogonal pair: gradient is -eps_prime") {
    const NoiseVector eps = {1.0, 0.0};
    const NoiseVector ep = {0.0, 1.0};
    const NoiseVector g = cosine_loss_grad(eps, ep);
    CHECK(g[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(g[1] == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("gradient matches central finite differences on random pairs") {
    for (std::size_t d : {2u, 16u, 64u}) {
        for (std::uint64_t k = 0; k < 8; ++k) {
            const NoiseVector eps = gaussian_vector(k, d);
            const NoiseVector ep = gaussian_vector(200 + k, d);
            const NoiseVector g = cosine_loss_grad(eps, ep);
            const auto f = [&](const NoiseVector& x) { return cosine_loss(x, ep); };
            const NoiseVector fd = oracles::fd_gradient(f, eps, 1e-6);
            CHECK(oracles::rel_vec_err(g, fd) < 1e-6);
        }
    }
}

TEST_CASE("gradient ignores the scale of eps_prime") {
    const NoiseVector eps = gaussian_vector(4, 8);
    const NoiseVector ep = gaussian_vector(5, 8);
    const NoiseVector a = cosine_loss_grad(eps, ep);
    const NoiseVector b = cosine_loss_grad(eps, scaled(ep, 7.0));
    CHECK(oracles::rel_vec_err(a, b) < 1e-13);
}

TEST_CASE("n = 0 returns the initial noise with an empty trace") {
    const NoiseVector eps0 = {1.0, 2.0};
    OptimizeOptions opt;
    opt.steps = 0;
    const OptimizeResult r = optimize_noise(eps0, identity_trip(), opt);
    CHECK(r.chosen == eps0);
    CHECK(r.trace.iterates.empty());
    CHECK(!r.trace.best_loss.has_value());
    CHECK(r.trace.best == eps0);
}

TEST_CASE("a perfect fixed point leaves the noise essentially unchanged") {
    const NoiseVector eps0 = gaussian_vector(7, 8);
    OptimizeOptions opt;
    opt.steps = 20;
    opt.lr = 0.5;
    opt.momentum = 0.5;
    const OptimizeResult r = optimize_noise(eps0, identity_trip(), opt);
    CHECK(oracles::rel_vec_err(eps0, r.trace.final) < 1e-12);
    CHECK(*r.trace.best_loss <= 1e-15);
}

TEST_CASE("one plain-GD step against orthogonal unit target: eps1 = eps + eps_prime") {
    const NoiseVector eps0 = {1.0, 0.0};
    const NoiseVector target = {0.0, 1.0};
    OptimizeOptions opt;
    opt.steps = 1;
    opt.lr = 1.0;
    opt.momentum = 0.0;
    opt.lr_schedule = LrSchedule::constant;
    const OptimizeResult r = optimize_noise(eps0, constant_target(target), opt);
    CHECK(r.trace.final[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.trace.final[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("three momentum steps match the hand-unrolled recursion") {
    // eps0 = (1,2,2), eps' = (0,3,0), lr = 0.5, momentum = 0.5, constant lr.
    // First iterate from exact fractions: eps1 = (26/27, 113/54, 52/27).
    const NoiseVector eps0 = {1.0, 2.0, 2.0};
    const NoiseVector target = {0.0, 3.0, 0.0};
    OptimizeOptions opt;
    opt.steps = 3;
    opt.lr = 0.5;
    opt.momentum = 0.5;
    opt.lr_schedule = LrSchedule::constant;
    const OptimizeResult r = optimize_noise(eps0, constant_target(target), opt);
    REQUIRE(r.trace.iterates.size() == 3);
    CHECK(r.trace.iterates[0].loss == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    // independent unrolled recursion
    NoiseVector eps = eps0;
    NoiseVector m(3, 0.0);
    for (int it = 0; it < 3; ++it) {
        double de = 0.0, ne2 = 0.0, nt2 = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            de += eps[j] * target[j];
            ne2 += eps[j] * eps[j];
            nt2 += target[j] * target[j];
        }
        const double cosv = de / std::sqrt(ne2 * nt2);
        for (std::size_t j = 0; j < 3; ++j) {
            const double g = cosv * eps[j] / ne2 - target[j] / std::sqrt(ne2 * nt2);
            m[j] = 0.5 * m[j] + g;
            eps[j] -= 0.5 * m[j];
        }
        if (it == 0) {
            CHECK(eps[0] == doctest::Approx(26.0 / 27.0).epsilon(1e-14));
            CHECK(eps[1] == doctest::Approx(113.0 / 54.0).epsilon(1e-14));
            CHECK(eps[2] == doctest::Approx(52.0 / 27.0).epsilon(1e-14));
        }
    }
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(r.trace.final[j] == doctest::Approx(eps[j]).epsilon(1e-13));
    }
}

TEST_CASE("momentum off with constant lr reduces to plain gradient descent") {
    const NoiseVector eps0 = gaussian_vector(9, 6);
    const NoiseVector target = gaussian_vector(10, 6);
    OptimizeOptions opt;
    opt.steps = 5;
    opt.lr = 0.3;
    opt.momentum = 0.0;
    opt.lr_schedule = LrSchedule::constant;
    const OptimizeResult r = optimize_noise(eps0, constant_target(target), opt);

    NoiseVector eps = eps0;
    for (int it = 0; it < 5; ++it) {
        const NoiseVector g = cosine_loss_grad(eps, target);
        for (std::size_t j = 0; j < 6; ++j) {
            eps[j] -= 0.3 * g[j];
        }
    }
    for (std::size_t j = 0; j < 6; ++j) {
        CHECK(r.trace.final[j] == doctest::Approx(eps[j]).epsilon(1e-13));
    }
}

TEST_CASE("cosine annealing starts at lr and decays monotonically") {
    const NoiseVector eps0 = gaussian_vector(3, 4);
    const NoiseVector target = gaussian_vector(11, 4);
    OptimizeOptions opt;
    opt.steps = 10;
    opt.lr = 2.0;
    opt.momentum = 0.25;
    opt.lr_schedule = LrSchedule::cosine_annealing;
    const OptimizeResult r = optimize_noise(eps0, constant_target(target), opt);
    REQUIRE(r.trace.iterates.size() == 10);
    CHECK(r.trace.iterates[0].lr == 2.0);
    for (std::size_t i = 1; i < 10; ++i) {
        CHECK(r.trace.iterates[i].lr <= r.trace.iterates[i - 1].lr);
    }
    // half-cosine: lr at i = n/2 is lr/2
    CHECK(r.trace.iterates[5].lr == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("best return policy never loses to the initial loss") {
    const auto suite = default_condition_suite();
    const MixtureCondition& c = find_condition(suite, "skew2-aniso");
    ExperimentConfig cfg;
    cfg.T = 4;
    const Pipeline p = build_pipeline(cfg);
    const RoundTripFn rt = [&](const NoiseVector& e) { return round_trip(e, c, p).eps_prime; };
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        OptimizeOptions opt;
        opt.steps = 15;
        opt.return_policy = ReturnPolicy::best;
        const OptimizeResult r = optimize_noise(gaussian_vector(seed, c.dim), rt, opt);
        CHECK(*r.trace.best_loss <= r.trace.iterates.front().loss);
        CHECK(r.chosen == r.trace.best);
    }
}

TEST_CASE("trace is bitwise deterministic") {
    const auto suite = default_condition_suite();
    const MixtureCondition& c = find_condition(suite, "pair2-close");
    ExperimentConfig cfg;
    cfg.T = 4;
    const Pipeline p = build_pipeline(cfg);
    const RoundTripFn rt = [&](const NoiseVector& e) { return round_trip(e, c, p).eps_prime; };
    OptimizeOptions opt;
    opt.steps = 8;
    const OptimizeResult a = optimize_noise(gaussian_vector(2, 2), rt, opt);
    const OptimizeResult b = optimize_noise(gaussian_vector(2, 2), rt, opt);
    REQUIRE(a.trace.iterates.size() == b.trace.iterates.size());
    for (std::size_t i = 0; i < a.trace.iterates.size(); ++i) {
        CHECK(a.trace.iterates[i].loss == b.trace.iterates[i].loss);
        CHECK(a.trace.iterates[i].step_norm == b.trace.iterates[i].step_norm);
    }
    CHECK(a.trace.final == b.trace.final);
}

TEST_CASE("update is invariant to positive rescaling of eps_prime") {
    const NoiseVector eps0 = gaussian_vector(1, 6);
    const NoiseVector target = gaussian_vector(14, 6);
    OptimizeOptions opt;
    opt.steps = 4;
    const OptimizeResult a = optimize_noise(eps0, constant_target(target), opt);
    const OptimizeResult b = optimize_noise(eps0, constant_target(scaled(target, 7.0)), opt);
    CHECK(oracles::rel_vec_err(a.trace.final, b.trace.final) < 1e-12);
}

TEST_CASE("a diverging round trip raises DivergenceError carrying the trace") {
    const NoiseVector eps0 = {1.0, 1.0};
    const RoundTripFn nan_trip = [](const NoiseVector& e) {
        return NoiseVector{std::nan(""), e[1]};
    };
    OptimizeOptions opt;
    opt.steps = 5;
    try {
        optimize_noise(eps0, nan_trip, opt);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(e.trace().initial == eps0);
        CHECK(e.trace().iterates.empty());  // failed at the first evaluation
    }
}

TEST_CASE("invalid hyperparameters are configuration errors") {
    OptimizeOptions opt;
    opt.lr = 0.0;
    CHECK_THROWS_AS(optimize_noise({1.0}, identity_trip(), opt), ConfigError);
    opt.lr = 0.5;
    opt.momentum = 1.0;
    CHECK_THROWS_AS(optimize_noise({1.0}, identity_trip(), opt), ConfigError);
}
