// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#include "noiselab/selection.hpp"

#include "noiselab/errors.hpp"
#include "noiselab/experiment.hpp"

namespace noiselab {

std::size_t pick_index(const std::vector<double>& scores, Objective objective) {
    if (scores.empty()) {
        throw DomainError("pick_index: empty score list");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        const bool better = objective == Objective::max ? scores[i] > scores[best]
                                                        : scores[i] < scores[best];
        if (better) {
            best = i;
        }
    }
    return best;
}

SelectionResult select_noise(const MixtureCondition& c, std::size_t K, const Pipeline& p,
                             Objective objective, std::size_t jobs) {
    if (K < 1) {
        throw DomainError("select_noise: K must be >= 1");
    }
    SelectionResult result;
    result.records.resize(K);
    try {
        parallel_for(K, jobs, [&](std::size_t seed) {
            try {
                result.records[seed] = evaluate_seed(seed, c, p);
            } catch (const Error& e) {
                throw Error(e.kind(),
                            std::string(e.what()) + " (seed " + std::to_string(seed) + ")");
            }
        });
    } catch (const Error& e) {
        // all-or-nothing: partial results are discarded with the run
        throw Error(e.kind(), std::string(e.what()) + " (condition '" + c.name + "')");
    }
    std::vector<double> scores(K);
    for (std::size_t i = 0; i < K; ++i) {
        scores[i] = result.records[i].score;
    }
    result.chosen_index = pick_index(scores, objective);
    return result;
}

}  // namespace noiselab
