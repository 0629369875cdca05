// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "noiselab/errors.hpp"
#include "noiselab/schedule.hpp"

using namespace noiselab;

TEST_CASE("single-step schedule: alpha_bar_1 = 1 - beta_1") {
    const DiffusionSchedule s = build_ddpm_schedule(1, 0.1, 0.1);
    REQUIRE(s.steps() == 1);
    CHECK(s.alpha_bar[0] == 1.0);
    CHECK(s.alpha_bar[1] == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("two-step linear schedule multiplies alphas") {
    const DiffusionSchedule s = build_ddpm_schedule(2, 0.1, 0.2);
    CHECK(s.beta[1] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(s.beta[2] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(s.alpha_bar[2] == doctest::Approx(0.72).epsilon(1e-15));
}

TEST_CASE("alpha_bar is strictly decreasing for any valid input") {
    for (std::size_t T : {1u, 2u, 7u, 32u, 500u}) {
        for (auto kind : {BetaKind::linear, BetaKind::cosine}) {
            const DiffusionSchedule s = build_ddpm_schedule(T, 1e-4, 0.3, kind);
            for (std::size_t t = 1; t <= T; ++t) {
                CHECK(s.alpha_bar[t] < s.alpha_bar[t - 1]);
                CHECK(s.beta[t] > 0.0);
                CHECK(s.beta[t] < 1.0);
                CHECK(s.alpha[t] == 1.0 - s.beta[t]);
            }
        }
    }
}

TEST_CASE("running product agrees with exp of summed logs to 1e-12") {
    const DiffusionSchedule s = default_ddpm_schedule(64);
    double log_sum = 0.0;
    for (std::size_t t = 1; t <= 64; ++t) {
        log_sum += std::log(s.alpha[t]);
        const double via_logs = std::exp(log_sum);
        CHECK(std::fabs(s.alpha_bar[t] - via_logs) <= 1e-12 * via_logs);
    }
}

TEST_CASE("rebuilding a schedule is bit-identical") {
    const DiffusionSchedule a = build_ddpm_schedule(16, 0.003, 0.4, BetaKind::cosine);
    const DiffusionSchedule b = build_ddpm_schedule(16, 0.003, 0.4, BetaKind::cosine);
    for (std::size_t t = 0; t <= 16; ++t) {
        CHECK(a.beta[t] == b.beta[t]);
        CHECK(a.alpha_bar[t] == b.alpha_bar[t]);
        CHECK(a.posterior_sigma[t] == b.posterior_sigma[t]);
    }
}

TEST_CASE("posterior sigma vanishes at t=1 and stays positive after") {
    const DiffusionSchedule s = default_ddpm_schedule(8);
    CHECK(s.posterior_sigma[1] == 0.0);
    for (std::size_t t = 2; t <= 8; ++t) {
        CHECK(s.posterior_sigma[t] > 0.0);
    }
}

TEST_CASE("default bounds reduce to the standard table at T=1000") {
    const auto [start, end] = default_beta_bounds(1000);
    CHECK(start == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(end == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("invalid ddpm inputs are configuration errors naming the field") {
    CHECK_THROWS_AS(build_ddpm_schedule(0, 0.1, 0.2), ConfigError);
    CHECK_THROWS_AS(build_ddpm_schedule(4, 0.0, 0.2), ConfigError);
    CHECK_THROWS_AS(build_ddpm_schedule(4, 0.1, 1.0), ConfigError);
    CHECK_THROWS_AS(build_ddpm_schedule(4, 0.3, 0.2), ConfigError);
    try {
        build_ddpm_schedule(4, 0.0, 0.2);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("beta_start") != std::string::npos);
    }
}

TEST_CASE("edm levels interpolate the endpoints exactly") {
    const EdmSchedule s = build_edm_schedule(10, 0.002, 80.0, 7.0, 0.5);
    REQUIRE(s.sigma.size() == 11);
    CHECK(s.sigma[0] == 80.0);
    CHECK(s.sigma[9] == 0.002);
    CHECK(s.sigma[10] == 0.0);
    for (std::size_t i = 1; i < s.sigma.size(); ++i) {
        CHECK(s.sigma[i] < s.sigma[i - 1]);
    }
}

TEST_CASE("edm steps=1 degenerates to (sigma_max, 0)") {
    const EdmSchedule s = build_edm_schedule(1, 0.002, 80.0, 7.0, 0.5);
    REQUIRE(s.sigma.size() == 2);
    CHECK(s.sigma[0] == 80.0);
    CHECK(s.sigma[1] == 0.0);
}

TEST_CASE("edm power-rule table spot values") {
    // spot indices computed independently from the rho-power interpolation
    const EdmSchedule s = build_edm_schedule(10, 0.002, 80.0, 7.0, 0.5);
    CHECK(s.sigma[1] == doctest::Approx(42.415189318512667).epsilon(1e-12));
    CHECK(s.sigma[5] == doctest::Approx(1.501741979068008).epsilon(1e-12));
    CHECK(s.sigma[8] == doctest::Approx(0.020435334553438746).epsilon(1e-12));
}

TEST_CASE("edm coefficients are finite with c_skip in [0,1]") {
    const EdmSchedule s = build_edm_schedule(10, 0.002, 80.0, 7.0, 0.5);
    REQUIRE(s.coeffs.size() == 10);
    for (const EdmCoeffs& c : s.coeffs) {
        CHECK(std::isfinite(c.c_skip));
        CHECK(std::isfinite(c.c_out));
        CHECK(std::isfinite(c.c_in));
        CHECK(std::isfinite(c.c_noise));
        CHECK(c.c_skip >= 0.0);
        CHECK(c.c_skip <= 1.0);
    }
    // c_skip = sd^2/(sigma^2+sd^2) at sigma_max
    CHECK(s.coeffs[0].c_skip == doctest::Approx(0.25 / 6400.25).epsilon(1e-12));
}

TEST_CASE("invalid edm inputs are configuration errors") {
    CHECK_THROWS_AS(build_edm_schedule(0, 0.002, 80.0, 7.0, 0.5), ConfigError);
    CHECK_THROWS_AS(build_edm_schedule(4, -1.0, 80.0, 7.0, 0.5), ConfigError);
    CHECK_THROWS_AS(build_edm_schedule(4, 80.0, 0.002, 7.0, 0.5), ConfigError);
    CHECK_THROWS_AS(build_edm_schedule(4, 0.002, 80.0, 0.0, 0.5), ConfigError);
}
