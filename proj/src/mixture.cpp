// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#include "noiselab/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "noiselab/errors.hpp"

namespace noiselab {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

}  // namespace

bool cholesky(SymMatrix& m) {
    const std::size_t n = m.n;
    for (std::size_t j = 0; j < n; ++j) {
        double d = m.at(j, j);
        for (std::size_t k = 0; k < j; ++k) {
            d -= m.at(j, k) * m.at(j, k);
        }
        if (!(d > 0.0)) {
            return false;
        }
        const double lj = std::sqrt(d);
        m.at(j, j) = lj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = m.at(i, j);
            for (std::size_t k = 0; k < j; ++k) {
                v -= m.at(i, k) * m.at(j, k);
            }
            m.at(i, j) = v / lj;
        }
    }
    // zero the strict upper triangle so the factor is usable as-is
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            m.at(i, j) = 0.0;
        }
    }
    return true;
}

void cholesky_solve(const SymMatrix& chol, const NoiseVector& rhs, NoiseVector& out) {
    const std::size_t n = chol.n;
    out.assign(n, 0.0);
    // forward: L y = rhs
    for (std::size_t i = 0; i < n; ++i) {
        double v = rhs[i];
        for (std::size_t k = 0; k < i; ++k) {
            v -= chol.at(i, k) * out[k];
        }
        out[i] = v / chol.at(i, i);
    }
    // backward: L^T x = y
    for (std::size_t ii = n; ii-- > 0;) {
        double v = out[ii];
        for (std::size_t k = ii + 1; k < n; ++k) {
            v -= chol.at(k, ii) * out[k];
        }
        out[ii] = v / chol.at(ii, ii);
    }
}

void MixtureCondition::validate() const {
    if (dim == 0) {
        throw ConfigError("condition '" + name + "': dim must be >= 1");
    }
    const std::size_t K = weights.size();
    if (K == 0) {
        throw ConfigError("condition '" + name + "': needs at least one component");
    }
    if (means.size() != K || covariances.size() != K) {
        throw ConfigError("condition '" + name + "': weights/means/covariances lengths differ");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) {
            throw ConfigError("condition '" + name + "': weights must be positive");
        }
        sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-12) {
        throw ConfigError("condition '" + name + "': weights must sum to 1 (got " +
                          std::to_string(sum) + ")");
    }
    for (std::size_t k = 0; k < K; ++k) {
        if (means[k].size() != dim) {
            throw ConfigError("condition '" + name + "': mean " + std::to_string(k) +
                              " has wrong dimension");
        }
        const Covariance& c = covariances[k];
        if (c.isotropic) {
            if (!(c.variance > 0.0)) {
                throw ConfigError("condition '" + name + "': component " + std::to_string(k) +
                                  " variance must be positive");
            }
        } else {
            if (c.full.n != dim) {
                throw ConfigError("condition '" + name + "': covariance " + std::to_string(k) +
                                  " has wrong dimension");
            }
            SymMatrix copy = c.full;
            for (std::size_t i = 0; i < dim; ++i) {
                for (std::size_t j = i + 1; j < dim; ++j) {
                    if (std::fabs(copy.at(i, j) - copy.at(j, i)) > 1e-12) {
                        throw ConfigError("condition '" + name + "': covariance " +
                                          std::to_string(k) + " is not symmetric");
                    }
                }
            }
            if (!cholesky(copy)) {
                throw ConfigError("condition '" + name + "': covariance " + std::to_string(k) +
                                  " is not positive definite");
            }
        }
    }
}

MixtureEval eval_blended_mixture(const NoiseVector& x, const MixtureCondition& c,
                                 double mean_scale, double cov_scale, double noise_var,
                                 bool want_score) {
    require_dim(x, c.dim, "eval_blended_mixture");
    const std::size_t K = c.components();
    const std::size_t d = c.dim;

    std::vector<double> log_terms(K);
    std::vector<NoiseVector> whitened(want_score ? K : 0);  // C_k^{-1} (x - m_k)

    NoiseVector r(d);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t i = 0; i < d; ++i) {
            r[i] = x[i] - mean_scale * c.means[k][i];
        }
        double quad;
        double logdet;
        if (c.covariances[k].isotropic) {
            const double cv = cov_scale * c.covariances[k].variance + noise_var;
            quad = squared_norm(r) / cv;
            logdet = static_cast<double>(d) * std::log(cv);
            if (want_score) {
                whitened[k] = scaled(r, 1.0 / cv);
            }
        } else {
            SymMatrix blended = c.covariances[k].full;
            for (std::size_t i = 0; i < d; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    blended.at(i, j) *= cov_scale;
                }
                blended.at(i, i) += noise_var;
            }
            if (!cholesky(blended)) {
                throw ConfigError("condition '" + c.name + "': blended covariance of component " +
                                  std::to_string(k) + " is not positive definite");
            }
            NoiseVector u;
            cholesky_solve(blended, r, u);
            quad = dot(r, u);
            logdet = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                logdet += 2.0 * std::log(blended.at(i, i));
            }
            if (want_score) {
                whitened[k] = std::move(u);
            }
        }
        log_terms[k] = std::log(c.weights[k]) -
                       0.5 * (static_cast<double>(d) * kLog2Pi + logdet + quad);
    }

    const double m = *std::max_element(log_terms.begin(), log_terms.end());
    double acc = 0.0;
    for (double lt : log_terms) {
        acc += std::exp(lt - m);
    }
    MixtureEval out;
    out.log_density = m + std::log(acc);

    if (want_score) {
        out.score.assign(d, 0.0);
        for (std::size_t k = 0; k < K; ++k) {
            const double resp = std::exp(log_terms[k] - out.log_density);
            for (std::size_t i = 0; i < d; ++i) {
                out.score[i] -= resp * whitened[k][i];
            }
        }
    }
    return out;
}

double diffused_log_density(const NoiseVector& x, std::size_t t, const MixtureCondition& c,
                            const DiffusionSchedule& sched) {
    if (t > sched.steps()) {
        throw DomainError("diffused_log_density: t out of range");
    }
    const double ab = sched.alpha_bar[t];
    return eval_blended_mixture(x, c, std::sqrt(ab), ab, 1.0 - ab, false).log_density;
}

NoiseVector predict_noise(const NoiseVector& x, std::size_t t, const MixtureCondition& c,
                          const DiffusionSchedule& sched) {
    if (t < 1 || t > sched.steps()) {
        throw DomainError("predict_noise: t must lie in [1, T]");
    }
    const double ab = sched.alpha_bar[t];
    MixtureEval ev = eval_blended_mixture(x, c, std::sqrt(ab), ab, 1.0 - ab, true);
    return scaled(ev.score, -std::sqrt(1.0 - ab));
}

NoiseVector predict_denoised(const NoiseVector& x, double sigma, const MixtureCondition& c) {
    if (!(sigma > 0.0)) {
        throw DomainError("predict_denoised: sigma must be > 0");
    }
    MixtureEval ev = eval_blended_mixture(x, c, 1.0, 1.0, sigma * sigma, true);
    return affine_combine(1.0, x, sigma * sigma, ev.score);
}

namespace {

MixtureCondition make_iso(std::string name, std::size_t dim, std::vector<double> weights,
                          std::vector<NoiseVector> means, std::vector<double> variances) {
    MixtureCondition c;
    c.name = std::move(name);
    c.dim = dim;
    c.weights = std::move(weights);
    c.means = std::move(means);
    c.covariances.reserve(variances.size());
    for (double v : variances) {
        c.covariances.push_back(Covariance::iso(v));
    }
    c.validate();
    return c;
}

NoiseVector block_mean(std::size_t dim, std::size_t block, std::size_t block_len, double value) {
    NoiseVector m(dim, 0.0);
    for (std::size_t i = block * block_len; i < (block + 1) * block_len && i < dim; ++i) {
        m[i] = value;
    }
    return m;
}

}  // namespace

std::vector<MixtureCondition> default_condition_suite() {
    std::vector<MixtureCondition> suite;

    suite.push_back(make_iso("gauss2-unit", 2, {1.0}, {{0.0, 0.0}}, {1.0}));

    suite.push_back(make_iso("pair2-close", 2, {0.5, 0.5},
                             {{0.9, 0.35}, {-0.9, -0.35}}, {0.7, 0.7}));

    suite.push_back(make_iso("tri2-balanced", 2, {0.5, 0.3, 0.2},
                             {{0.9, 0.0}, {-0.7, 0.75}, {-0.5, -0.85}}, {0.6, 0.8, 0.7}));

    {
        // six modes on a soft ring of radius 1
        std::vector<NoiseVector> means;
        for (int k = 0; k < 6; ++k) {
            const double a = 2.0 * M_PI * k / 6.0;
            means.push_back({std::cos(a), std::sin(a)});
        }
        suite.push_back(make_iso("ring2-soft", 2,
                                 std::vector<double>(6, 1.0 / 6.0), std::move(means),
                                 std::vector<double>(6, 0.55)));
    }

    {
        MixtureCondition c;
        c.name = "skew2-aniso";
        c.dim = 2;
        c.weights = {0.6, 0.4};
        c.means = {{0.7, 0.45}, {-0.8, -0.35}};
        SymMatrix s1(2);
        s1.at(0, 0) = 0.85;
        s1.at(0, 1) = s1.at(1, 0) = 0.25;
        s1.at(1, 1) = 0.7;
        SymMatrix s2(2);
        s2.at(0, 0) = 0.75;
        s2.at(0, 1) = s2.at(1, 0) = -0.2;
        s2.at(1, 1) = 0.85;
        c.covariances = {Covariance::dense(s1), Covariance::dense(s2)};
        c.validate();
        suite.push_back(std::move(c));
    }

    {
        NoiseVector m(16);
        for (std::size_t i = 0; i < 16; ++i) {
            m[i] = (i % 2 == 0) ? 0.25 : -0.25;
        }
        suite.push_back(make_iso("gauss16-shifted", 16, {1.0}, {std::move(m)}, {1.0}));
    }

    {
        NoiseVector m1(16, 0.0), m2(16, 0.0), m3(16, 0.0), m4(16, 0.0);
        for (std::size_t i = 0; i < 8; ++i) {
            m1[i] = 0.35;
            m2[i] = -0.35;
        }
        for (std::size_t i = 0; i < 16; i += 2) {
            m3[i] = 0.35;
        }
        for (std::size_t i = 0; i < 16; ++i) {
            m4[i] = (i % 2 == 0) ? 0.25 : -0.25;
        }
        suite.push_back(make_iso("quad16", 16, {0.4, 0.3, 0.2, 0.1},
                                 {std::move(m1), std::move(m2), std::move(m3), std::move(m4)},
                                 {0.75, 0.75, 0.8, 0.7}));
    }

    {
        std::vector<NoiseVector> means;
        means.push_back(block_mean(16, 0, 4, 0.5));
        means.push_back(block_mean(16, 1, 4, -0.5));
        means.push_back(block_mean(16, 2, 4, 0.5));
        means.push_back(block_mean(16, 3, 4, -0.5));
        NoiseVector m5(16, 0.12);
        means.push_back(std::move(m5));
        suite.push_back(make_iso("mix16-heavy", 16, {0.4, 0.25, 0.15, 0.12, 0.08},
                                 std::move(means), {0.8, 0.8, 0.7, 0.7, 1.0}));
    }

    {
        NoiseVector m(64, 0.125);
        NoiseVector mn = scaled(m, -1.0);
        suite.push_back(make_iso("pair64-mild", 64, {0.5, 0.5}, {std::move(m), std::move(mn)},
                                 {0.8, 0.8}));
    }

    {
        std::vector<NoiseVector> means;
        for (std::size_t b = 0; b < 6; ++b) {
            means.push_back(block_mean(64, b, 10, 0.35));
        }
        suite.push_back(make_iso("hex64", 64, std::vector<double>(6, 1.0 / 6.0), std::move(means),
                                 std::vector<double>(6, 0.7)));
    }

    return suite;
}

const MixtureCondition& find_condition(const std::vector<MixtureCondition>& suite,
                                       const std::string& name) {
    for (const MixtureCondition& c : suite) {
        if (c.name == name) {
            return c;
        }
    }
    throw ConfigError("unknown condition '" + name + "'");
}

}  // namespace noiselab
