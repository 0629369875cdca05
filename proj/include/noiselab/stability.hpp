// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <utility>

#include "noiselab/metrics.hpp"
#include "noiselab/mixture.hpp"
#include "noiselab/sampler.hpp"
#include "noiselab/vec.hpp"

namespace noiselab {

// One denoise-invert round trip: eps -> x0 -> eps'.
struct RoundTripResult {
    NoiseVector x0;
    NoiseVector eps_prime;
};

struct StabilityRecord {
    std::uint64_t seed = 0;
    NoiseVector epsilon;
    NoiseVector epsilon_prime;
    double score = 0.0;  // cos(eps, eps') in [-1, 1]
    NoiseVector x0;
    QualityScores quality;
};

RoundTripResult round_trip(const NoiseVector& eps, const MixtureCondition& c, const Pipeline& p);
RoundTripResult round_trip_with(const NoiseVector& eps, const Pipeline& p, const Predictor& pred);

// Cosine similarity of the two flattened vectors (row-major flatten for
// multi-axis noises), clamped to [-1, 1]. Excursions beyond 1e-12 outside the
// interval raise InternalConsistencyError instead of clamping silently;
// zero-norm inputs raise DegenerateInputError.
double stability_score(const NoiseVector& eps, const NoiseVector& eps_prime);

namespace detail {
double clamp_cosine(double raw);
}

// Seeded noise -> full record, including sample quality of the generated x0.
StabilityRecord evaluate_seed(std::uint64_t seed, const MixtureCondition& c, const Pipeline& p);

}  // namespace noiselab
