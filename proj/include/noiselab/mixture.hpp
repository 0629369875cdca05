// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "noiselab/schedule.hpp"
#include "noiselab/vec.hpp"

namespace noiselab {

// Dense symmetric matrix, row-major.
struct SymMatrix {
    std::size_t n = 0;
    std::vector<double> a;

    SymMatrix() = default;
    explicit SymMatrix(std::size_t dim) : n(dim), a(dim * dim, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

// Per-component covariance: isotropic (variance * I) by default, full
// symmetric positive-definite matrix when needed.
struct Covariance {
    bool isotropic = true;
    double variance = 1.0;  // isotropic case
    SymMatrix full;         // full case

    static Covariance iso(double v) {
        Covariance c;
        c.isotropic = true;
        c.variance = v;
        return c;
    }
    static Covariance dense(SymMatrix m) {
        Covariance c;
        c.isotropic = false;
        c.full = std::move(m);
        return c;
    }
};

// The desk-scale stand-in for a text prompt: a named Gaussian mixture that
// defines the data distribution (and therefore the exact noise predictor).
struct MixtureCondition {
    std::string name;
    std::size_t dim = 0;
    std::vector<double> weights;
    std::vector<NoiseVector> means;
    std::vector<Covariance> covariances;

    std::size_t components() const { return weights.size(); }

    // Throws ConfigError naming the offending field when invariants fail
    // (weights sum to 1 within 1e-12, covariances positive-definite, ...).
    void validate() const;
};

struct MixtureEval {
    double log_density = 0.0;
    NoiseVector score;  // gradient of log density, filled when requested
};

// Closed-form evaluation of the blended mixture
//   sum_k w_k N(x; mean_scale*mu_k, cov_scale*Sigma_k + noise_var*I)
// via log-sum-exp; the score is the posterior-weighted sum of component
// scores, not a numerical derivative.
MixtureEval eval_blended_mixture(const NoiseVector& x, const MixtureCondition& c,
                                 double mean_scale, double cov_scale, double noise_var,
                                 bool want_score);

// log p_t(x) of the variance-preserving diffused mixture, 0 <= t <= T.
double diffused_log_density(const NoiseVector& x, std::size_t t, const MixtureCondition& c,
                            const DiffusionSchedule& sched);

// Exact conditional-expectation noise -sqrt(1-abar_t) * grad log p_t(x),
// 1 <= t <= T.
NoiseVector predict_noise(const NoiseVector& x, std::size_t t, const MixtureCondition& c,
                          const DiffusionSchedule& sched);

// Posterior mean E[x0 | x_sigma] of the variance-exploding mixture
// (x_sigma = x0 + sigma * eps), via x + sigma^2 * score.
NoiseVector predict_denoised(const NoiseVector& x, double sigma, const MixtureCondition& c);

// Cholesky factorization (lower). Returns false when the matrix is not
// positive definite.
bool cholesky(SymMatrix& m);
void cholesky_solve(const SymMatrix& chol, const NoiseVector& rhs, NoiseVector& out);

// The ten named conditions shipped with the harness: d in {2, 16, 64},
// 1..8 components each.
std::vector<MixtureCondition> default_condition_suite();

const MixtureCondition& find_condition(const std::vector<MixtureCondition>& suite,
                                       const std::string& name);

}  // namespace noiselab
