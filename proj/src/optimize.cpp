// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#include "noiselab/optimize.hpp"

#include <cmath>

#include "noiselab/stability.hpp"

namespace noiselab {

double cosine_loss(const NoiseVector& eps, const NoiseVector& eps_prime) {
    return 1.0 - stability_score(eps, eps_prime);
}

NoiseVector cosine_loss_grad(const NoiseVector& eps, const NoiseVector& eps_prime) {
    if (eps.size() != eps_prime.size()) {
        throw ShapeError("cosine_loss_grad: dimension mismatch");
    }
    const double na2 = squared_norm(eps);
    const double nb2 = squared_norm(eps_prime);
    if (na2 == 0.0 || nb2 == 0.0) {
        throw DegenerateInputError("cosine_loss_grad: zero-norm input");
    }
    const double norm_prod = std::sqrt(na2 * nb2);
    const double cosv = dot(eps, eps_prime) / norm_prod;
    NoiseVector g(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        g[i] = -(eps_prime[i] / norm_prod - cosv * eps[i] / na2);
    }
    return g;
}

OptimizeResult optimize_noise(const NoiseVector& eps0, const RoundTripFn& round_trip_fn,
                              const OptimizeOptions& opt) {
    if (!(opt.lr > 0.0)) {
        throw ConfigError("optimize.lr: must be > 0");
    }
    if (!(opt.momentum >= 0.0) || !(opt.momentum < 1.0)) {
        throw ConfigError("optimize.momentum: must lie in [0, 1)");
    }

    OptimizationTrace trace;
    trace.initial = eps0;
    trace.iterates.reserve(opt.steps);

    NoiseVector eps = eps0;
    NoiseVector m(eps0.size(), 0.0);
    NoiseVector best = eps0;
    std::optional<double> best_loss;

    for (std::size_t i = 0; i < opt.steps; ++i) {
        const NoiseVector eps_prime = round_trip_fn(eps);
        const double loss = cosine_loss(eps, eps_prime);
        if (!std::isfinite(loss)) {
            trace.final = eps;
            trace.best = best;
            trace.best_loss = best_loss;
            throw DivergenceError("optimize_noise: non-finite loss at iteration " +
                                      std::to_string(i),
                                  trace);
        }
        if (!best_loss || loss < *best_loss) {
            best_loss = loss;
            best = eps;
        }

        const NoiseVector g = cosine_loss_grad(eps, eps_prime);
        const double lr_i =
            opt.lr_schedule == LrSchedule::cosine_annealing
                ? opt.lr * 0.5 *
                      (1.0 + std::cos(M_PI * static_cast<double>(i) /
                                      static_cast<double>(opt.steps)))
                : opt.lr;

        double m_norm2 = 0.0;
        double step_norm2 = 0.0;
        for (std::size_t j = 0; j < eps.size(); ++j) {
            m[j] = opt.momentum * m[j] + g[j];
            const double delta = lr_i * m[j];
            eps[j] -= delta;
            m_norm2 += m[j] * m[j];
            step_norm2 += delta * delta;
        }
        if (!all_finite(eps)) {
            trace.final = eps;
            trace.best = best;
            trace.best_loss = best_loss;
            throw DivergenceError("optimize_noise: non-finite iterate at iteration " +
                                      std::to_string(i),
                                  trace);
        }

        IterateRecord rec;
        rec.index = i;
        rec.loss = loss;
        rec.stability = 1.0 - loss;
        rec.lr = lr_i;
        rec.momentum_norm = std::sqrt(m_norm2);
        rec.step_norm = std::sqrt(step_norm2);
        trace.iterates.push_back(rec);
    }

    trace.final = eps;
    trace.best = best;
    trace.best_loss = best_loss;

    OptimizeResult out;
    out.chosen = opt.return_policy == ReturnPolicy::best ? trace.best : trace.final;
    out.trace = std::move(trace);
    return out;
}

}  // namespace noiselab
