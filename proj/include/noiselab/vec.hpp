// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "noiselab/errors.hpp"

namespace noiselab {

// A noise (or state) vector. Multi-axis noises are handled as row-major
// flattened views; the whole pipeline works on flat vectors.
using NoiseVector = std::vector<double>;

inline double dot(const NoiseVector& a, const NoiseVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

inline double squared_norm(const NoiseVector& a) { return dot(a, a); }

inline double norm(const NoiseVector& a) { return std::sqrt(squared_norm(a)); }

inline NoiseVector scaled(const NoiseVector& a, double c) {
    NoiseVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = c * a[i];
    }
    return out;
}

// out = a*x + b*y, elementwise
inline NoiseVector affine_combine(double a, const NoiseVector& x, double b, const NoiseVector& y) {
    NoiseVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = a * x[i] + b * y[i];
    }
    return out;
}

inline NoiseVector subtract(const NoiseVector& a, const NoiseVector& b) {
    NoiseVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] - b[i];
    }
    return out;
}

inline double distance(const NoiseVector& a, const NoiseVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline bool all_finite(const NoiseVector& a) {
    for (double v : a) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

inline void require_dim(const NoiseVector& v, std::size_t d, const char* what) {
    if (v.size() != d) {
        throw ShapeError(std::string(what) + ": expected dim " + std::to_string(d) + ", got " +
                         std::to_string(v.size()));
    }
}

}  // namespace noiselab
