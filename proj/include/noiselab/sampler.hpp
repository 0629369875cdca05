// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "noiselab/mixture.hpp"
#include "noiselab/schedule.hpp"
#include "noiselab/vec.hpp"

namespace noiselab {

enum class Family { ddim, edm };
enum class TrajectoryMode { approx, exact, stochastic };

// Which coefficient multiplies the predictor term in the DDIM inversion step.
// exact_inverse (sqrt(abar_t)) makes the step the algebraic inverse of the
// denoise step; lagged (sqrt(abar_{t-1})) is kept behind a flag for
// comparison runs.
enum class InversionCoeff { exact_inverse, lagged };

struct FixedPointOptions {
    double tol = 1e-10;
    int max_iter = 50;
};

// Noise prediction eps_hat(x, t) for the variance-preserving family.
using EpsFn = std::function<NoiseVector(const NoiseVector&, std::size_t)>;

// Network-convention output U(c_in * x, level) for the EDM family; the step
// operations apply the c_skip/c_out combination themselves.
using EdmUFn = std::function<NoiseVector(const NoiseVector&, std::size_t)>;

struct Predictor {
    EpsFn eps;    // used when family == ddim
    EdmUFn u;     // used when family == edm
    std::size_t dim = 0;
};

// Analytic testbed predictor for a mixture condition.
Predictor make_analytic_predictor(const MixtureCondition& c, const DiffusionSchedule& ddim,
                                  const EdmSchedule& edm);

// eps_hat == 0 and U == 0; useful for cancellation checks.
Predictor make_zero_predictor(std::size_t dim);

struct Pipeline {
    Family family = Family::ddim;
    DiffusionSchedule ddim;
    EdmSchedule edm;
    TrajectoryMode inversion_mode = TrajectoryMode::approx;
    InversionCoeff inversion_coeff = InversionCoeff::exact_inverse;
    FixedPointOptions fixed_point;
    bool stochastic = false;           // ancestral denoise variant (generation only)
    std::uint64_t stochastic_seed = 0;

    std::size_t steps() const { return family == Family::ddim ? ddim.steps() : edm.steps(); }

    static Pipeline make_ddim(DiffusionSchedule sched);
    static Pipeline make_edm(EdmSchedule sched);
};

enum class Direction { denoising, inversion };

// One ordered pass through the chain: x_T..x_0 for denoising, x_0..x_T for
// inversion. states.size() == steps + 1.
struct Trajectory {
    Family family = Family::ddim;
    TrajectoryMode mode = TrajectoryMode::approx;
    Direction direction = Direction::denoising;
    std::vector<NoiseVector> states;
};

// --- single steps -----------------------------------------------------------

// x_{t-1} = sqrt(abar_{t-1}/abar_t) * x_t
//         + sqrt(abar_{t-1}) * (sqrt((1-abar_{t-1})/abar_{t-1})
//                               - sqrt((1-abar_t)/abar_t)) * eps_hat(x_t, t)
NoiseVector ddim_denoise_step(const NoiseVector& x_t, std::size_t t, const DiffusionSchedule& s,
                              const EpsFn& eps);

// Approximate inversion: evaluates eps_hat at (x_{t-1}, t) and applies the
// algebraic inverse of the denoise step.
NoiseVector ddim_invert_step(const NoiseVector& x_prev, std::size_t t, const DiffusionSchedule& s,
                             const EpsFn& eps,
                             InversionCoeff coeff = InversionCoeff::exact_inverse);

// Exact inversion: solves x_{t-1} = ddim_denoise_step(x_t) for x_t by plain
// fixed-point iteration seeded from the approximate answer. Throws
// ConvergenceError carrying the residual after max_iter.
NoiseVector ddim_invert_step_exact(const NoiseVector& x_prev, std::size_t t,
                                   const DiffusionSchedule& s, const EpsFn& eps,
                                   const FixedPointOptions& fp);

// Euler step x(level i) -> x(level i+1) of the EDM family:
//   x_next = x + ((sigma_{i+1} - sigma_i)/sigma_i) * mu,
//   mu = x - (c_skip*x + c_out*U(c_in*x)).
NoiseVector edm_denoise_step(const NoiseVector& x, std::size_t i, const EdmSchedule& s,
                             const EdmUFn& u);

// Solved form of the Euler step with U evaluated at the lower-noise state:
//   x_hi = (sigma_i*x_lo + (sigma_{i+1}-sigma_i)*c_out*U)
//          / ((sigma_{i+1}-sigma_i)*(1-c_skip) + sigma_i).
NoiseVector edm_invert_step(const NoiseVector& x_lo, std::size_t i, const EdmSchedule& s,
                            const EdmUFn& u);

NoiseVector edm_invert_step_exact(const NoiseVector& x_lo, std::size_t i, const EdmSchedule& s,
                                  const EdmUFn& u, const FixedPointOptions& fp);

// --- full passes -------------------------------------------------------------

// Denoise a unit Gaussian noise into a sample. For the EDM family the chain
// starts at sigma_max * eps.
Trajectory denoise(const NoiseVector& eps, const MixtureCondition& c, const Pipeline& p);
Trajectory denoise_with(const NoiseVector& eps, const Pipeline& p, const Predictor& pred);

Trajectory invert(const NoiseVector& x0, const MixtureCondition& c, const Pipeline& p,
                  TrajectoryMode mode);
Trajectory invert_with(const NoiseVector& x0, const Pipeline& p, const Predictor& pred,
                       TrajectoryMode mode);

// Endpoint of an inversion trajectory expressed in unit-noise coordinates
// (divides by sigma_max for the EDM family).
NoiseVector noise_endpoint(const Trajectory& traj, const Pipeline& p);

void write_trajectory_csv(const Trajectory& traj, const Pipeline& p, const std::string& path);

}  // namespace noiselab
