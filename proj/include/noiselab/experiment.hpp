// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "noiselab/config.hpp"
#include "noiselab/metrics.hpp"
#include "noiselab/selection.hpp"
#include "noiselab/stability.hpp"

namespace noiselab {

// Runs fn(i) for i in [0, n) on a bounded worker pool. Work items must be
// independent; results belong in preallocated slots so any pool size gives
// identical output. Exceptions are re-thrown for the lowest failing index.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

struct SelectionConditionReport {
    std::string condition;
    std::size_t k = 0;
    std::vector<StabilityRecord> records;
    std::size_t stable_seed = 0;
    std::size_t unstable_seed = 0;
    double spearman_rho = 0.0;  // stability score vs loglik over the K records
};

struct SelectionReport {
    std::string artifact_version;
    std::string config_hash;
    std::vector<SelectionConditionReport> conditions;
    double winning_rate_loglik = 0.0;        // stable over unstable, one pair per condition
    double winning_rate_neg_mode_dist = 0.0;
    double mean_stable_loglik = 0.0;
    double mean_unstable_loglik = 0.0;
    double mean_spearman_rho = 0.0;
};

struct OptimizationRunReport {
    std::string condition;
    std::size_t T = 0;
    std::uint64_t seed = 0;
    bool diverged = false;
    std::size_t iterations = 0;
    double loss_initial = 0.0;
    double loss_final = 0.0;
    double loss_best = 0.0;
    double loglik_original = 0.0;
    double loglik_final = 0.0;
    double loglik_best = 0.0;
};

struct OptimizationCellReport {  // one (condition, T) aggregate
    std::string condition;
    std::size_t T = 0;
    std::size_t runs = 0;
    std::size_t diverged = 0;
    double mean_loss_initial = 0.0;
    double mean_loss_final = 0.0;
    double mean_loss_best = 0.0;
    double winning_rate_final_loglik = 0.0;
    double winning_rate_best_loglik = 0.0;
};

struct OptimizationReport {
    std::string artifact_version;
    std::string config_hash;
    std::vector<OptimizationRunReport> runs;
    std::vector<OptimizationCellReport> cells;
    double winning_rate_final_loglik = 0.0;  // optimized over original, all runs
    double winning_rate_best_loglik = 0.0;
    double mean_loss_initial = 0.0;
    double mean_loss_final = 0.0;
};

SelectionReport run_selection_experiment(const ExperimentConfig& cfg,
                                         const std::vector<MixtureCondition>& suite);

OptimizationReport run_optimization_experiment(const ExperimentConfig& cfg,
                                               const std::vector<MixtureCondition>& suite);

// CSV bodies are deterministic (no timestamps); provenance lives in the JSON
// reports as config hash + artifact version.
void write_selection_report(const SelectionReport& rep, const ExperimentConfig& cfg,
                            const std::string& out_dir);
void write_optimization_report(const OptimizationReport& rep, const ExperimentConfig& cfg,
                               const std::string& out_dir);

// 17-significant-digit formatting shared by every CSV writer.
std::string fmt_g17(double v);

}  // namespace noiselab
