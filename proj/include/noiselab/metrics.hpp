// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "noiselab/mixture.hpp"
#include "noiselab/vec.hpp"

namespace noiselab {

// Desk-scale sample quality: log density under the true (t = 0) mixture plus
// two distance views of the nearest component.
struct QualityScores {
    double loglik = 0.0;
    double mode_dist = 0.0;    // Euclidean distance to the nearest component mean
    double mahalanobis = 0.0;  // within that component
};

QualityScores sample_quality(const NoiseVector& x0, const MixtureCondition& c);

// Fraction of pairs with score_a > score_b; exact ties count 1/2.
double winning_rate(const std::vector<std::pair<double, double>>& pairs);

struct RankCorrelation {
    double rho = 0.0;
    std::size_t n = 0;
};

// Spearman rho with average-rank tie handling. Requires length >= 3 and
// non-constant inputs.
RankCorrelation rank_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace noiselab
