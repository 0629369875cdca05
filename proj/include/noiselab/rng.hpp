// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "noiselab/vec.hpp"

namespace noiselab {

// Counter-based deterministic Gaussian sampling. Component i of the vector
// for a given seed is a pure function of (seed, stream, i):
//
//   h = mix64(mix64(seed + SEED_SALT) + mix64(stream + STREAM_SALT) + i)
//   u = ((h >> 11) + 0.5) * 2^-53          in (0, 1)
//   z = normal_quantile(u)                 (Wichura's PPND16 rational fit)
//
// mix64 is the splitmix64 finalizer. There is no sequential state, so
// vectors are identical regardless of evaluation order or thread count.

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t z);

// Inverse standard-normal CDF, accurate to ~1e-15 over (0, 1).
double normal_quantile(double p);

// Standard-normal vector for (seed, stream 0).
NoiseVector gaussian_vector(std::uint64_t seed, std::size_t dim);

// Independent stream for the same seed (the stochastic sampler draws its
// per-step noise from stream = t).
NoiseVector gaussian_vector_stream(std::uint64_t seed, std::uint64_t stream, std::size_t dim);

}  // namespace noiselab
