// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#include "noiselab/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "noiselab/errors.hpp"

namespace noiselab {

namespace {

void validate_ddpm_inputs(std::size_t T, double beta_start, double beta_end) {
    if (T < 1) {
        throw ConfigError("schedule.T: step count must be >= 1");
    }
    if (!(beta_start > 0.0) || !(beta_start < 1.0)) {
        throw ConfigError("schedule.beta_start: must lie in (0, 1)");
    }
    if (!(beta_end > 0.0) || !(beta_end < 1.0)) {
        throw ConfigError("schedule.beta_end: must lie in (0, 1)");
    }
    if (beta_start > beta_end) {
        throw ConfigError("schedule.beta_start: must not exceed beta_end");
    }
}

std::vector<double> linear_betas(std::size_t T, double beta_start, double beta_end) {
    std::vector<double> betas(T);
    if (T == 1) {
        betas[0] = beta_start;
        return betas;
    }
    const double step = (beta_end - beta_start) / static_cast<double>(T - 1);
    for (std::size_t i = 0; i < T; ++i) {
        betas[i] = beta_start + step * static_cast<double>(i);
    }
    betas[T - 1] = beta_end;
    return betas;
}

// Squared-cosine alpha_bar profile with the usual 0.008 offset; betas are the
// implied per-step ratios, clipped from above at beta_end.
std::vector<double> cosine_betas(std::size_t T, double beta_end) {
    const double s = 0.008;
    auto profile = [&](double t) {
        const double arg = (t / static_cast<double>(T) + s) / (1.0 + s) * (M_PI / 2.0);
        const double c = std::cos(arg);
        return c * c;
    };
    const double f0 = profile(0.0);
    std::vector<double> betas(T);
    double prev = 1.0;
    for (std::size_t t = 1; t <= T; ++t) {
        const double abar = profile(static_cast<double>(t)) / f0;
        double beta = 1.0 - abar / prev;
        beta = std::min(beta, beta_end);
        beta = std::max(beta, 1e-8);
        betas[t - 1] = beta;
        prev *= 1.0 - beta;
    }
    return betas;
}

}  // namespace

DiffusionSchedule build_ddpm_schedule(std::size_t T, double beta_start, double beta_end,
                                      BetaKind kind) {
    validate_ddpm_inputs(T, beta_start, beta_end);

    const std::vector<double> betas =
        kind == BetaKind::linear ? linear_betas(T, beta_start, beta_end) : cosine_betas(T, beta_end);

    DiffusionSchedule s;
    s.beta.assign(T + 1, 0.0);
    s.alpha.assign(T + 1, 1.0);
    s.alpha_bar.assign(T + 1, 1.0);
    s.posterior_sigma.assign(T + 1, 0.0);
    for (std::size_t t = 1; t <= T; ++t) {
        s.beta[t] = betas[t - 1];
        s.alpha[t] = 1.0 - betas[t - 1];
        s.alpha_bar[t] = s.alpha[t] * s.alpha_bar[t - 1];
        // DDPM posterior scale; zero at t = 1 because alpha_bar[0] = 1.
        s.posterior_sigma[t] =
            std::sqrt(s.beta[t] * (1.0 - s.alpha_bar[t - 1]) / (1.0 - s.alpha_bar[t]));
    }
    return s;
}

std::pair<double, double> default_beta_bounds(std::size_t T) {
    if (T < 1) {
        throw ConfigError("schedule.T: step count must be >= 1");
    }
    const double start = std::min(0.1 / static_cast<double>(T), 0.05);
    const double end = std::min(20.0 / static_cast<double>(T), 0.45);
    return {start, std::max(start, end)};
}

DiffusionSchedule default_ddpm_schedule(std::size_t T) {
    const auto [start, end] = default_beta_bounds(T);
    return build_ddpm_schedule(T, start, end, BetaKind::linear);
}

EdmSchedule build_edm_schedule(std::size_t steps, double sigma_min, double sigma_max, double rho,
                               double sigma_data) {
    if (steps < 1) {
        throw ConfigError("edm.steps: must be >= 1");
    }
    if (!(sigma_min > 0.0) || !(sigma_max > sigma_min)) {
        throw ConfigError("edm.sigma bounds: need 0 < sigma_min < sigma_max");
    }
    if (!(rho > 0.0)) {
        throw ConfigError("edm.rho: must be > 0");
    }
    if (!(sigma_data > 0.0)) {
        throw ConfigError("edm.sigma_data: must be > 0");
    }

    EdmSchedule s;
    s.sigma_data = sigma_data;
    s.sigma.resize(steps + 1);
    if (steps == 1) {
        s.sigma[0] = sigma_max;
    } else {
        const double hi = std::pow(sigma_max, 1.0 / rho);
        const double lo = std::pow(sigma_min, 1.0 / rho);
        for (std::size_t i = 0; i < steps; ++i) {
            const double f = static_cast<double>(i) / static_cast<double>(steps - 1);
            s.sigma[i] = std::pow(hi + f * (lo - hi), rho);
        }
        s.sigma[0] = sigma_max;
        s.sigma[steps - 1] = sigma_min;
    }
    s.sigma[steps] = 0.0;

    s.coeffs.resize(steps);
    const double sd2 = sigma_data * sigma_data;
    for (std::size_t i = 0; i < steps; ++i) {
        const double sg = s.sigma[i];
        const double denom = sg * sg + sd2;
        EdmCoeffs& c = s.coeffs[i];
        c.c_skip = sd2 / denom;
        c.c_out = sg * sigma_data / std::sqrt(denom);
        c.c_in = 1.0 / std::sqrt(denom);
        c.c_noise = 0.25 * std::log(sg);
    }
    return s;
}

EdmSchedule default_edm_schedule(std::size_t steps) {
    return build_edm_schedule(steps, 0.002, 80.0, 7.0, 0.5);
}

}  // namespace noiselab
