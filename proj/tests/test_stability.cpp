// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "noiselab/config.hpp"
#include "noiselab/errors.hpp"
#include "noiselab/rng.hpp"
#include "noiselab/stability.hpp"
#include "oracles.hpp"

using namespace noiselab;

TEST_CASE("cosine of equal, opposite, and orthogonal vectors") {
    CHECK(stability_score({1.0, 2.0}, {1.0, 2.0}) == 1.0);
    CHECK(stability_score({1.0, 2.0}, {-1.0, -2.0}) == -1.0);
    CHECK(stability_score({1.0, 0.0}, {0.0, 1.0}) == 0.0);
}

TEST_CASE("cosine is invariant to positive rescaling") {
    const NoiseVector a = gaussian_vector(1, 8);
    const NoiseVector b = gaussian_vector(2, 8);
    const double s = stability_score(a, b);
    CHECK(stability_score(scaled(a, 7.0), b) == doctest::Approx(s).epsilon(1e-14));
    CHECK(stability_score(a, scaled(b, 0.001)) == doctest::Approx(s).epsilon(1e-14));
}

TEST_CASE("score always lands in [-1, 1]") {
    for (std::uint64_t k = 0; k < 50; ++k) {
        const double s = stability_score(gaussian_vector(k, 16), gaussian_vector(k + 1, 16));
        CHECK(s >= -1.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("zero-norm inputs are degenerate") {
    CHECK_THROWS_AS(stability_score({0.0, 0.0}, {1.0, 0.0}), DegenerateInputError);
    CHECK_THROWS_AS(stability_score({1.0, 0.0}, {0.0, 0.0}), DegenerateInputError);
    CHECK_THROWS_AS(stability_score({1.0}, {1.0, 2.0}), ShapeError);
}

TEST_CASE("clamp tolerates rounding but rejects real excursions") {
    CHECK(detail::clamp_cosine(1.0 + 5e-13) == 1.0);
    CHECK(detail::clamp_cosine(-1.0 - 5e-13) == -1.0);
    CHECK(detail::clamp_cosine(0.37) == 0.37);
    CHECK_THROWS_AS(detail::clamp_cosine(1.0 + 1e-11), InternalConsistencyError);
    CHECK_THROWS_AS(detail::clamp_cosine(-1.0 - 1e-11), InternalConsistencyError);
}

TEST_CASE("zero predictor round trip returns the noise") {
    const Pipeline p = Pipeline::make_ddim(build_ddpm_schedule(3, 0.75, 0.75));
    const Predictor zero = make_zero_predictor(4);
    const NoiseVector eps = gaussian_vector(5, 4);
    const RoundTripResult rt = round_trip_with(eps, p, zero);
    for (std::size_t i = 0; i < eps.size(); ++i) {
        CHECK(rt.eps_prime[i] == eps[i]);
    }
    CHECK(stability_score(eps, rt.eps_prime) == 1.0);
}

TEST_CASE("exact inversion mode recovers eps within 10x the fixed-point tol") {
    const auto suite = default_condition_suite();
    ExperimentConfig cfg;
    cfg.T = 4;
    cfg.inversion_mode = TrajectoryMode::exact;
    const Pipeline p = build_pipeline(cfg);
    for (const char* name : {"pair2-close", "quad16"}) {
        const MixtureCondition& c = find_condition(suite, name);
        const NoiseVector eps = gaussian_vector(3, c.dim);
        const RoundTripResult rt = round_trip(eps, c, p);
        CHECK(distance(eps, rt.eps_prime) <= 10.0 * p.fixed_point.tol * norm(eps));
        CHECK(stability_score(eps, rt.eps_prime) >= 1.0 - 1e-9);
    }
}

TEST_CASE("d=1 round trip pair matches the scalar oracle") {
    MixtureCondition c;
    c.name = "d1";
    c.dim = 1;
    c.weights = {1.0};
    c.means = {{0.0}};
    c.covariances = {Covariance::iso(1.0)};
    c.validate();
    const Pipeline p = Pipeline::make_ddim(default_ddpm_schedule(4));
    oracles::ScalarTestbed oracle{p.ddim.alpha_bar, 0.0, 1.0};
    const NoiseVector eps = {0.88};
    const RoundTripResult rt = round_trip(eps, c, p);
    CHECK(rt.x0[0] == doctest::Approx(oracle.denoise(eps[0]).back()).epsilon(1e-10));
    CHECK(rt.eps_prime[0] == doctest::Approx(oracle.round_trip_approx(eps[0])).epsilon(1e-10));
}

TEST_CASE("approx-mode score is deterministic per (seed, condition, T)") {
    const auto suite = default_condition_suite();
    const MixtureCondition& c = find_condition(suite, "mix16-heavy");
    ExperimentConfig cfg;
    cfg.T = 4;
    const Pipeline p = build_pipeline(cfg);
    const StabilityRecord a = evaluate_seed(6, c, p);
    const StabilityRecord b = evaluate_seed(6, c, p);
    CHECK(a.score == b.score);
    CHECK(a.quality.loglik == b.quality.loglik);
    CHECK(a.seed == 6);
    CHECK(a.epsilon.size() == 16);
    CHECK(a.epsilon_prime.size() == 16);
}

TEST_CASE("non-finite input noise is rejected before sampling") {
    const auto suite = default_condition_suite();
    const MixtureCondition& c = find_condition(suite, "gauss2-unit");
    const Pipeline p = Pipeline::make_ddim(default_ddpm_schedule(2));
    CHECK_THROWS_AS(round_trip({std::nan(""), 0.0}, c, p), DomainError);
}
