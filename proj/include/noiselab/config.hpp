// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "noiselab/mixture.hpp"
#include "noiselab/optimize.hpp"
#include "noiselab/sampler.hpp"

namespace noiselab {

struct ScheduleSpec {
    BetaKind kind = BetaKind::linear;
    std::optional<double> beta_start;  // empty -> default bounds scaled to T
    std::optional<double> beta_end;
};

struct EdmSpec {
    std::size_t steps = 4;
    double sigma_min = 0.002;
    double sigma_max = 80.0;
    double rho = 7.0;
    double sigma_data = 0.5;
};

struct SeedRange {
    std::uint64_t begin = 0;
    std::size_t count = 16;
};

struct ExperimentConfig {
    std::vector<std::string> conditions;  // empty -> whole suite
    Family family = Family::ddim;
    std::size_t T = 4;
    ScheduleSpec schedule;
    EdmSpec edm;
    TrajectoryMode inversion_mode = TrajectoryMode::approx;
    InversionCoeff inversion_coeff = InversionCoeff::exact_inverse;
    FixedPointOptions fixed_point;
    std::size_t k = 100;  // selection seeds
    OptimizeOptions optimization;
    SeedRange seeds;                 // optimization study
    std::vector<std::size_t> t_sweep = {4, 8, 16, 32};
    std::string out_dir = ".";
    std::size_t jobs = 0;  // 0 -> hardware concurrency
    bool plots = false;
};

ExperimentConfig config_from_json_file(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& cfg);

// Result-affecting fields only (drops jobs/out_dir/plots); the form hashed
// into report provenance.
std::string config_canonical_text(const ExperimentConfig& cfg);

// FNV-1a over the canonical JSON form; recorded in report provenance.
std::string config_hash(const ExperimentConfig& cfg);

// Paper-style preset: K = 100, n = 100, lr = 100, momentum = 0.5, annealing.
void apply_paper_defaults(ExperimentConfig& cfg);

// Build the sampler pipeline for this config; t_override substitutes T (or
// EDM step count) during sweeps.
Pipeline build_pipeline(const ExperimentConfig& cfg,
                        std::optional<std::size_t> t_override = std::nullopt);

// Condition suites as config files.
std::vector<MixtureCondition> conditions_from_json_file(const std::string& path);
std::vector<MixtureCondition> conditions_from_json_text(const std::string& text);
std::string conditions_to_json_text(const std::vector<MixtureCondition>& suite);

}  // namespace noiselab
