// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#include "noiselab/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "noiselab/errors.hpp"
#include "noiselab/rng.hpp"

namespace noiselab {

namespace {

// sqrt((1 - abar)/abar); zero at abar == 1 so the t=1 step stays exact.
double snr_term(double abar) { return std::sqrt((1.0 - abar) / abar); }

void require_step(std::size_t t, const DiffusionSchedule& s, const char* op) {
    if (t < 1 || t > s.steps()) {
        throw DomainError(std::string(op) + ": step index " + std::to_string(t) +
                          " outside [1, " + std::to_string(s.steps()) + "]");
    }
}

}  // namespace

Pipeline Pipeline::make_ddim(DiffusionSchedule sched) {
    Pipeline p;
    p.family = Family::ddim;
    p.ddim = std::move(sched);
    return p;
}

Pipeline Pipeline::make_edm(EdmSchedule sched) {
    Pipeline p;
    p.family = Family::edm;
    p.edm = std::move(sched);
    return p;
}

Predictor make_analytic_predictor(const MixtureCondition& c, const DiffusionSchedule& ddim,
                                  const EdmSchedule& edm) {
    Predictor pred;
    pred.dim = c.dim;
    pred.eps = [c, ddim](const NoiseVector& x, std::size_t t) {
        return predict_noise(x, t, c, ddim);
    };
    pred.u = [c, edm](const NoiseVector& x_in, std::size_t i) {
        const EdmCoeffs& cf = edm.coeffs.at(i);
        const NoiseVector x = scaled(x_in, 1.0 / cf.c_in);
        const NoiseVector denoised = predict_denoised(x, edm.sigma[i], c);
        // unfold the skip connection to recover the raw network output
        NoiseVector u(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) {
            u[j] = (denoised[j] - cf.c_skip * x[j]) / cf.c_out;
        }
        return u;
    };
    return pred;
}

Predictor make_zero_predictor(std::size_t dim) {
    Predictor pred;
    pred.dim = dim;
    pred.eps = [dim](const NoiseVector&, std::size_t) { return NoiseVector(dim, 0.0); };
    pred.u = [dim](const NoiseVector&, std::size_t) { return NoiseVector(dim, 0.0); };
    return pred;
}

NoiseVector ddim_denoise_step(const NoiseVector& x_t, std::size_t t, const DiffusionSchedule& s,
                              const EpsFn& eps) {
    require_step(t, s, "ddim_denoise_step");
    const double ab_t = s.alpha_bar[t];
    const double ab_prev = s.alpha_bar[t - 1];
    const double scale = std::sqrt(ab_prev / ab_t);
    const double drift = std::sqrt(ab_prev) * (snr_term(ab_prev) - snr_term(ab_t));
    const NoiseVector e = eps(x_t, t);
    require_dim(e, x_t.size(), "ddim_denoise_step predictor output");
    return affine_combine(scale, x_t, drift, e);
}

NoiseVector ddim_invert_step(const NoiseVector& x_prev, std::size_t t, const DiffusionSchedule& s,
                             const EpsFn& eps, InversionCoeff coeff) {
    require_step(t, s, "ddim_invert_step");
    const double ab_t = s.alpha_bar[t];
    const double ab_prev = s.alpha_bar[t - 1];
    const double scale = std::sqrt(ab_t / ab_prev);
    const double lead = coeff == InversionCoeff::exact_inverse ? std::sqrt(ab_t)
                                                               : std::sqrt(ab_prev);
    const double drift = lead * (snr_term(ab_t) - snr_term(ab_prev));
    const NoiseVector e = eps(x_prev, t);
    require_dim(e, x_prev.size(), "ddim_invert_step predictor output");
    return affine_combine(scale, x_prev, drift, e);
}

NoiseVector ddim_invert_step_exact(const NoiseVector& x_prev, std::size_t t,
                                   const DiffusionSchedule& s, const EpsFn& eps,
                                   const FixedPointOptions& fp) {
    require_step(t, s, "ddim_invert_step_exact");
    const double ab_t = s.alpha_bar[t];
    const double ab_prev = s.alpha_bar[t - 1];
    const double scale = std::sqrt(ab_t / ab_prev);
    const double drift = std::sqrt(ab_t) * (snr_term(ab_t) - snr_term(ab_prev));

    // x_t I-> scale*x_{t-1} + drift*eps_hat(x_t, t); seed from the approx answer
    NoiseVector y = ddim_invert_step(x_prev, t, s, eps, InversionCoeff::exact_inverse);
    double step = 0.0;
    for (int it = 0; it < fp.max_iter; ++it) {
        const NoiseVector e = eps(y, t);
        NoiseVector next = affine_combine(scale, x_prev, drift, e);
        step = distance(next, y);
        y = std::move(next);
        if (step < fp.tol) {
            return y;
        }
    }
    throw ConvergenceError("ddim_invert_step_exact: fixed point not reached at t=" +
                               std::to_string(t) + " after " + std::to_string(fp.max_iter) +
                               " iterations",
                           step);
}

namespace {

void require_level(std::size_t i, const EdmSchedule& s, const char* op) {
    if (i >= s.steps()) {
        throw DomainError(std::string(op) + ": level index " + std::to_string(i) + " outside [0, " +
                          std::to_string(s.steps()) + ")");
    }
}

double edm_invert_denominator(const EdmSchedule& s, std::size_t i) {
    const double lo = s.sigma[i + 1];
    const double hi = s.sigma[i];
    const double denom = (lo - hi) * (1.0 - s.coeffs[i].c_skip) + hi;
    if (denom == 0.0) {
        throw DomainError("edm_invert_step: degenerate schedule, zero denominator at level " +
                          std::to_string(i));
    }
    return denom;
}

}  // namespace

NoiseVector edm_denoise_step(const NoiseVector& x, std::size_t i, const EdmSchedule& s,
                             const EdmUFn& u) {
    require_level(i, s, "edm_denoise_step");
    const double hi = s.sigma[i];
    const double lo = s.sigma[i + 1];
    if (hi == 0.0) {
        throw DomainError("edm_denoise_step: current level sigma is zero");
    }
    const EdmCoeffs& cf = s.coeffs[i];
    const NoiseVector uv = u(scaled(x, cf.c_in), i);
    require_dim(uv, x.size(), "edm_denoise_step predictor output");
    const double ratio = (lo - hi) / hi;
    NoiseVector out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double mu = x[j] - (cf.c_skip * x[j] + cf.c_out * uv[j]);
        out[j] = x[j] + ratio * mu;
    }
    return out;
}

NoiseVector edm_invert_step(const NoiseVector& x_lo, std::size_t i, const EdmSchedule& s,
                            const EdmUFn& u) {
    require_level(i, s, "edm_invert_step");
    const double hi = s.sigma[i];
    const double lo = s.sigma[i + 1];
    const EdmCoeffs& cf = s.coeffs[i];
    const double denom = edm_invert_denominator(s, i);
    const NoiseVector uv = u(scaled(x_lo, cf.c_in), i);
    require_dim(uv, x_lo.size(), "edm_invert_step predictor output");
    NoiseVector out(x_lo.size());
    for (std::size_t j = 0; j < x_lo.size(); ++j) {
        out[j] = (hi * x_lo[j] + (lo - hi) * cf.c_out * uv[j]) / denom;
    }
    return out;
}

NoiseVector edm_invert_step_exact(const NoiseVector& x_lo, std::size_t i, const EdmSchedule& s,
                                  const EdmUFn& u, const FixedPointOptions& fp) {
    require_level(i, s, "edm_invert_step_exact");
    const double hi = s.sigma[i];
    const double lo = s.sigma[i + 1];
    const EdmCoeffs& cf = s.coeffs[i];
    const double denom = edm_invert_denominator(s, i);

    NoiseVector y = edm_invert_step(x_lo, i, s, u);
    double step = 0.0;
    for (int it = 0; it < fp.max_iter; ++it) {
        const NoiseVector uv = u(scaled(y, cf.c_in), i);
        NoiseVector next(x_lo.size());
        for (std::size_t j = 0; j < x_lo.size(); ++j) {
            next[j] = (hi * x_lo[j] + (lo - hi) * cf.c_out * uv[j]) / denom;
        }
        step = distance(next, y);
        y = std::move(next);
        if (step < fp.tol) {
            return y;
        }
    }
    throw ConvergenceError("edm_invert_step_exact: fixed point not reached at level " +
                               std::to_string(i) + " after " + std::to_string(fp.max_iter) +
                               " iterations",
                           step);
}

namespace {

NoiseVector ddim_ancestral_step(const NoiseVector& x_t, std::size_t t, const DiffusionSchedule& s,
                                const EpsFn& eps, std::uint64_t noise_seed) {
    const double a_t = s.alpha[t];
    const double ab_t = s.alpha_bar[t];
    const NoiseVector e = eps(x_t, t);
    const double mean_scale = 1.0 / std::sqrt(a_t);
    const double eps_scale = -mean_scale * s.beta[t] / std::sqrt(1.0 - ab_t);
    NoiseVector out = affine_combine(mean_scale, x_t, eps_scale, e);
    const double sg = s.posterior_sigma[t];
    if (sg > 0.0) {
        const NoiseVector z = gaussian_vector_stream(noise_seed, t, x_t.size());
        for (std::size_t j = 0; j < out.size(); ++j) {
            out[j] += sg * z[j];
        }
    }
    return out;
}

Trajectory denoise_ddim(const NoiseVector& eps_vec, const Pipeline& p, const Predictor& pred) {
    const std::size_t T = p.ddim.steps();
    Trajectory traj;
    traj.family = Family::ddim;
    traj.mode = p.stochastic ? TrajectoryMode::stochastic : TrajectoryMode::approx;
    traj.direction = Direction::denoising;
    traj.states.reserve(T + 1);
    traj.states.push_back(eps_vec);
    NoiseVector x = eps_vec;
    for (std::size_t t = T; t >= 1; --t) {
        try {
            x = p.stochastic ? ddim_ancestral_step(x, t, p.ddim, pred.eps, p.stochastic_seed)
                             : ddim_denoise_step(x, t, p.ddim, pred.eps);
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " (denoise step t=" + std::to_string(t) +
                                      ")");
        }
        traj.states.push_back(x);
    }
    return traj;
}

Trajectory denoise_edm(const NoiseVector& eps_vec, const Pipeline& p, const Predictor& pred) {
    const std::size_t n = p.edm.steps();
    Trajectory traj;
    traj.family = Family::edm;
    traj.mode = TrajectoryMode::approx;
    traj.direction = Direction::denoising;
    traj.states.reserve(n + 1);
    NoiseVector x = scaled(eps_vec, p.edm.sigma[0]);
    traj.states.push_back(x);
    for (std::size_t i = 0; i < n; ++i) {
        try {
            x = edm_denoise_step(x, i, p.edm, pred.u);
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " (denoise level i=" + std::to_string(i) +
                                      ")");
        }
        traj.states.push_back(x);
    }
    return traj;
}

}  // namespace

Trajectory denoise_with(const NoiseVector& eps_vec, const Pipeline& p, const Predictor& pred) {
    if (p.stochastic && p.family != Family::ddim) {
        throw ConfigError("stochastic sampling is only available for the ddim family");
    }
    return p.family == Family::ddim ? denoise_ddim(eps_vec, p, pred) : denoise_edm(eps_vec, p, pred);
}

Trajectory denoise(const NoiseVector& eps_vec, const MixtureCondition& c, const Pipeline& p) {
    require_dim(eps_vec, c.dim, "denoise input");
    return denoise_with(eps_vec, p, make_analytic_predictor(c, p.ddim, p.edm));
}

Trajectory invert_with(const NoiseVector& x0, const Pipeline& p, const Predictor& pred,
                       TrajectoryMode mode) {
    if (mode == TrajectoryMode::stochastic) {
        throw ConfigError("inversion has no stochastic mode");
    }
    Trajectory traj;
    traj.family = p.family;
    traj.mode = mode;
    traj.direction = Direction::inversion;
    if (p.family == Family::ddim) {
        const std::size_t T = p.ddim.steps();
        traj.states.reserve(T + 1);
        traj.states.push_back(x0);
        NoiseVector x = x0;
        for (std::size_t t = 1; t <= T; ++t) {
            try {
                x = mode == TrajectoryMode::exact
                        ? ddim_invert_step_exact(x, t, p.ddim, pred.eps, p.fixed_point)
                        : ddim_invert_step(x, t, p.ddim, pred.eps, p.inversion_coeff);
            } catch (const Error& e) {
                throw Error(e.kind(), std::string(e.what()) + " (invert step t=" +
                                          std::to_string(t) + ")");
            }
            traj.states.push_back(x);
        }
    } else {
        const std::size_t n = p.edm.steps();
        traj.states.reserve(n + 1);
        traj.states.push_back(x0);
        NoiseVector x = x0;
        for (std::size_t i = n; i-- > 0;) {
            try {
                x = mode == TrajectoryMode::exact
                        ? edm_invert_step_exact(x, i, p.edm, pred.u, p.fixed_point)
                        : edm_invert_step(x, i, p.edm, pred.u);
            } catch (const Error& e) {
                throw Error(e.kind(), std::string(e.what()) + " (invert level i=" +
                                          std::to_string(i) + ")");
            }
            traj.states.push_back(x);
        }
    }
    return traj;
}

Trajectory invert(const NoiseVector& x0, const MixtureCondition& c, const Pipeline& p,
                  TrajectoryMode mode) {
    require_dim(x0, c.dim, "invert input");
    return invert_with(x0, p, make_analytic_predictor(c, p.ddim, p.edm), mode);
}

NoiseVector noise_endpoint(const Trajectory& traj, const Pipeline& p) {
    if (traj.states.empty()) {
        throw InternalConsistencyError("noise_endpoint: empty trajectory");
    }
    const NoiseVector& last = traj.states.back();
    if (p.family == Family::edm) {
        return scaled(last, 1.0 / p.edm.sigma[0]);
    }
    return last;
}

void write_trajectory_csv(const Trajectory& traj, const Pipeline& p, const std::string& path) {
    std::ofstream os(path);
    if (!os) {
        throw ConfigError("cannot open trajectory file '" + path + "' for writing");
    }
    const std::size_t d = traj.states.empty() ? 0 : traj.states.front().size();
    os << "t";
    for (std::size_t j = 0; j < d; ++j) {
        os << ",c" << j;
    }
    os << "\n";
    const std::size_t T = p.steps();
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const std::size_t label = traj.direction == Direction::denoising ? T - k : k;
        os << label;
        for (std::size_t j = 0; j < d; ++j) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", traj.states[k][j]);
            os << "," << buf;
        }
        os << "\n";
    }
}

}  // namespace noiselab
