// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace noiselab {

// Error taxonomy shared by the library and the CLI. kind() is the stable
// machine-readable tag emitted in error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("config", m) {}
};

struct ShapeError : Error {
    explicit ShapeError(const std::string& m) : Error("shape", m) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& m) : Error("domain", m) {}
};

struct DegenerateInputError : Error {
    explicit DegenerateInputError(const std::string& m) : Error("degenerate_input", m) {}
};

struct InternalConsistencyError : Error {
    explicit InternalConsistencyError(const std::string& m) : Error("internal_consistency", m) {}
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& m, double residual)
        : Error("convergence", m), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace noiselab
