// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "noiselab/stability.hpp"

namespace noiselab {

enum class Objective { max, min };

struct SelectionResult {
    std::size_t chosen_index = 0;          // == chosen seed (seeds are 0..K-1)
    std::vector<StabilityRecord> records;  // sorted by seed

    const StabilityRecord& chosen() const { return records[chosen_index]; }
};

// Argmax (or argmin) index over scores; equal scores resolve to the lowest
// index, so the reduction is order-independent.
std::size_t pick_index(const std::vector<double>& scores, Objective objective);

// Evaluates seeds 0..K-1 and returns the most (or least) stable noise.
// The K round trips are independent; jobs > 1 runs them on a worker pool.
// Any failure aborts the whole run, naming the failing seed.
SelectionResult select_noise(const MixtureCondition& c, std::size_t K, const Pipeline& p,
                             Objective objective = Objective::max, std::size_t jobs = 1);

}  // namespace noiselab
