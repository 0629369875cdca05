// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#include "noiselab/stability.hpp"

#include <cmath>

#include "noiselab/errors.hpp"
#include "noiselab/rng.hpp"

namespace noiselab {

namespace detail {

// Rounding may push a true cosine a hair outside [-1, 1]; anything beyond
// 1e-12 indicates a real bug upstream.
double clamp_cosine(double raw) {
    if (std::fabs(raw) > 1.0 + 1e-12) {
        throw InternalConsistencyError("cosine similarity " + std::to_string(raw) +
                                       " outside [-1, 1] beyond rounding tolerance");
    }
    if (raw > 1.0) {
        return 1.0;
    }
    if (raw < -1.0) {
        return -1.0;
    }
    return raw;
}

}  // namespace detail

double stability_score(const NoiseVector& eps, const NoiseVector& eps_prime) {
    if (eps.size() != eps_prime.size()) {
        throw ShapeError("stability_score: dimension mismatch");
    }
    const double na2 = squared_norm(eps);
    const double nb2 = squared_norm(eps_prime);
    if (na2 == 0.0 || nb2 == 0.0) {
        throw DegenerateInputError("stability_score: zero-norm input");
    }
    // sqrt of the product keeps cos(v, v) exactly 1
    return detail::clamp_cosine(dot(eps, eps_prime) / std::sqrt(na2 * nb2));
}

RoundTripResult round_trip_with(const NoiseVector& eps, const Pipeline& p, const Predictor& pred) {
    if (!all_finite(eps)) {
        throw DomainError("round_trip: non-finite input noise");
    }
    const Trajectory den = denoise_with(eps, p, pred);
    RoundTripResult out;
    out.x0 = den.states.back();
    const Trajectory inv = invert_with(out.x0, p, pred, p.inversion_mode);
    out.eps_prime = noise_endpoint(inv, p);
    return out;
}

RoundTripResult round_trip(const NoiseVector& eps, const MixtureCondition& c, const Pipeline& p) {
    require_dim(eps, c.dim, "round_trip input");
    return round_trip_with(eps, p, make_analytic_predictor(c, p.ddim, p.edm));
}

StabilityRecord evaluate_seed(std::uint64_t seed, const MixtureCondition& c, const Pipeline& p) {
    StabilityRecord rec;
    rec.seed = seed;
    rec.epsilon = gaussian_vector(seed, c.dim);
    RoundTripResult rt = round_trip(rec.epsilon, c, p);
    rec.x0 = std::move(rt.x0);
    rec.epsilon_prime = std::move(rt.eps_prime);
    rec.score = stability_score(rec.epsilon, rec.epsilon_prime);
    rec.quality = sample_quality(rec.x0, c);
    return rec;
}

}  // namespace noiselab
