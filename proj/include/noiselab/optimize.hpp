// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "noiselab/errors.hpp"
#include "noiselab/vec.hpp"

namespace noiselab {

double cosine_loss(const NoiseVector& eps, const NoiseVector& eps_prime);

// Gradient of 1 - cos(eps, eps') with respect to eps, holding eps' constant:
//   -( eps'/(|eps||eps'|) - cos(eps,eps') * eps/|eps|^2 ).
// eps' enters only through its direction, so the sampler never needs to be
// differentiated.
NoiseVector cosine_loss_grad(const NoiseVector& eps, const NoiseVector& eps_prime);

enum class LrSchedule { constant, cosine_annealing };
enum class ReturnPolicy { last, best };

struct OptimizeOptions {
    std::size_t steps = 50;
    double lr = 0.5;
    double momentum = 0.5;
    LrSchedule lr_schedule = LrSchedule::cosine_annealing;
    ReturnPolicy return_policy = ReturnPolicy::last;
};

struct IterateRecord {
    std::size_t index = 0;
    double loss = 0.0;
    double stability = 0.0;
    double lr = 0.0;
    double momentum_norm = 0.0;  // |m_{i+1}| after the update
    double step_norm = 0.0;      // |eps_{i+1} - eps_i|
};

struct OptimizationTrace {
    std::vector<IterateRecord> iterates;  // length == steps
    NoiseVector initial;
    NoiseVector final;
    NoiseVector best;                  // lowest-loss iterate seen (including eps_0)
    std::optional<double> best_loss;   // empty when steps == 0
};

struct OptimizeResult {
    NoiseVector chosen;  // final or best per return policy
    OptimizationTrace trace;
};

// eps -> eps' for the current iterate; the harness binds this to the
// denoise-invert round trip.
using RoundTripFn = std::function<NoiseVector(const NoiseVector&)>;

// Raised when an iterate or loss goes non-finite; carries the trace so far.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& m, OptimizationTrace trace)
        : Error("divergence", m), trace_(std::move(trace)) {}
    const OptimizationTrace& trace() const noexcept { return trace_; }

private:
    OptimizationTrace trace_;
};

// Momentum gradient descent on J(eps) = 1 - cos(eps, eps'), with eps'
// recomputed each iteration and treated as a constant inside the gradient.
// m_0 = 0; cosine annealing uses lr_i = lr * 0.5 * (1 + cos(pi * i / steps)).
OptimizeResult optimize_noise(const NoiseVector& eps0, const RoundTripFn& round_trip,
                              const OptimizeOptions& opt);

}  // namespace noiselab
