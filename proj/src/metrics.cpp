// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#include "noiselab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "noiselab/errors.hpp"

namespace noiselab {

QualityScores sample_quality(const NoiseVector& x0, const MixtureCondition& c) {
    require_dim(x0, c.dim, "sample_quality");

    QualityScores q;
    q.loglik = eval_blended_mixture(x0, c, 1.0, 1.0, 0.0, false).log_density;

    // nearest component by Euclidean distance to the mean, ties to lowest index
    std::size_t nearest = 0;
    double best = distance(x0, c.means[0]);
    for (std::size_t k = 1; k < c.components(); ++k) {
        const double dk = distance(x0, c.means[k]);
        if (dk < best) {
            best = dk;
            nearest = k;
        }
    }
    q.mode_dist = best;

    const Covariance& cov = c.covariances[nearest];
    const NoiseVector r = subtract(x0, c.means[nearest]);
    if (cov.isotropic) {
        q.mahalanobis = norm(r) / std::sqrt(cov.variance);
    } else {
        SymMatrix chol = cov.full;
        if (!cholesky(chol)) {
            throw InternalConsistencyError("sample_quality: covariance lost positive-definiteness");
        }
        NoiseVector u;
        cholesky_solve(chol, r, u);
        q.mahalanobis = std::sqrt(std::max(0.0, dot(r, u)));
    }
    return q;
}

double winning_rate(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.empty()) {
        throw DomainError("winning_rate: empty input");
    }
    double wins = 0.0;
    for (const auto& [a, b] : pairs) {
        if (a > b) {
            wins += 1.0;
        } else if (a == b) {
            wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs.size());
}

namespace {

// average ranks (1-based), ties share the mean of their positions
std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });

    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) {
            ++j;
        }
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[idx[k]] = r;
        }
        i = j + 1;
    }
    return ranks;
}

}  // namespace

RankCorrelation rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw DomainError("rank_correlation: length mismatch");
    }
    if (a.size() < 3) {
        throw DomainError("rank_correlation: need at least 3 observations");
    }
    const std::vector<double> ra = average_ranks(a);
    const std::vector<double> rb = average_ranks(b);

    const std::size_t n = a.size();
    const double mean = 0.5 * static_cast<double>(n + 1);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = ra[i] - mean;
        const double db = rb[i] - mean;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0) {
        throw DomainError("rank_correlation: first input is constant");
    }
    if (sbb == 0.0) {
        throw DomainError("rank_correlation: second input is constant");
    }
    RankCorrelation out;
    out.rho = sab / std::sqrt(saa * sbb);
    out.n = n;
    return out;
}

}  // namespace noiselab
