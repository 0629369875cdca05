// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace noiselab {

enum class BetaKind { linear, cosine };

// DDPM/DDIM coefficient tables. All sequences are indexed by step t with a
// sentinel at t = 0: beta[0] = 0, alpha[0] = 1 and alpha_bar[0] = 1, so the
// final denoise step t=1 -> 0 and the first inversion step 0 -> 1 are
// well-defined.
struct DiffusionSchedule {
    std::vector<double> beta;             // beta[t], t in 1..T
    std::vector<double> alpha;            // 1 - beta[t]
    std::vector<double> alpha_bar;        // prod_{s<=t} alpha[s], alpha_bar[0] = 1
    std::vector<double> posterior_sigma;  // ancestral-sampler scale, sigma[1] = 0

    std::size_t steps() const { return beta.empty() ? 0 : beta.size() - 1; }
};

// Linear: beta interpolates evenly from beta_start to beta_end over T steps.
// Cosine: the squared-cosine alpha_bar profile (offset 0.008); beta_end is the
// per-step clip ceiling and beta_start is validated but otherwise unused.
DiffusionSchedule build_ddpm_schedule(std::size_t T, double beta_start, double beta_end,
                                      BetaKind kind = BetaKind::linear);

// Default beta bounds scaled to T: (0.1/T, 20/T) clamped to (<=0.05, <=0.45).
// At T = 1000 this is the common (1e-4, 0.02) linear table; short-T tables
// stay well inside (0,1) so every step remains comfortably invertible.
std::pair<double, double> default_beta_bounds(std::size_t T);

DiffusionSchedule default_ddpm_schedule(std::size_t T);

struct EdmCoeffs {
    double c_skip = 0.0;
    double c_out = 0.0;
    double c_in = 0.0;
    double c_noise = 0.0;
};

// Karras-style noise levels, decreasing from sigma_max to sigma_min with a
// terminal 0 appended: sigma.size() == steps + 1. coeffs[i] belongs to the
// nonzero level sigma[i].
struct EdmSchedule {
    std::vector<double> sigma;
    std::vector<EdmCoeffs> coeffs;
    double sigma_data = 0.5;

    std::size_t steps() const { return sigma.empty() ? 0 : sigma.size() - 1; }
};

EdmSchedule build_edm_schedule(std::size_t steps, double sigma_min, double sigma_max, double rho,
                               double sigma_data);

EdmSchedule default_edm_schedule(std::size_t steps);

}  // namespace noiselab
