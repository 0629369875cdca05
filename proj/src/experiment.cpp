// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#include "noiselab/experiment.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "noiselab/errors.hpp"
#include "noiselab/optimize.hpp"
#include "noiselab/rng.hpp"
#include "noiselab/svg.hpp"
#include "noiselab/version.hpp"

namespace noiselab {

using json = nlohmann::ordered_json;

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs == 0) {
        jobs = std::max(1u, std::thread::hardware_concurrency());
    }
    jobs = std::min(jobs, n);
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) {
                    return;
                }
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) {
        t.join();
    }
    // rethrow the lowest-index failure so errors are pool-size independent
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i]) {
            std::rethrow_exception(errors[i]);
        }
    }
}

namespace {

std::vector<const MixtureCondition*> resolve_conditions(const ExperimentConfig& cfg,
                                                        const std::vector<MixtureCondition>& suite) {
    std::vector<const MixtureCondition*> out;
    if (cfg.conditions.empty()) {
        for (const MixtureCondition& c : suite) {
            out.push_back(&c);
        }
    } else {
        for (const std::string& name : cfg.conditions) {
            out.push_back(&find_condition(suite, name));
        }
    }
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
    }
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) {
        throw ConfigError("cannot open '" + path + "' for writing");
    }
    return os;
}

json provenance(const ExperimentConfig& cfg) {
    json j;
    j["artifact_version"] = kArtifactVersion;
    j["csv_schema_version"] = kCsvSchemaVersion;
    j["config_hash"] = config_hash(cfg);
    j["config"] = json::parse(config_canonical_text(cfg));
    return j;
}

}  // namespace

SelectionReport run_selection_experiment(const ExperimentConfig& cfg,
                                         const std::vector<MixtureCondition>& suite) {
    const auto conditions = resolve_conditions(cfg, suite);
    const Pipeline pipeline = build_pipeline(cfg);

    SelectionReport report;
    report.artifact_version = kArtifactVersion;
    report.config_hash = config_hash(cfg);
    report.conditions.resize(conditions.size());

    for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
        const MixtureCondition& c = *conditions[ci];
        SelectionResult max_sel = select_noise(c, cfg.k, pipeline, Objective::max, cfg.jobs);

        SelectionConditionReport& cr = report.conditions[ci];
        cr.condition = c.name;
        cr.k = cfg.k;
        cr.records = std::move(max_sel.records);
        cr.stable_seed = max_sel.chosen_index;

        std::vector<double> scores(cr.records.size());
        std::vector<double> logliks(cr.records.size());
        for (std::size_t i = 0; i < cr.records.size(); ++i) {
            scores[i] = cr.records[i].score;
            logliks[i] = cr.records[i].quality.loglik;
        }
        cr.unstable_seed = pick_index(scores, Objective::min);
        if (cr.records.size() >= 3) {
            try {
                cr.spearman_rho = rank_correlation(scores, logliks).rho;
            } catch (const DomainError&) {
                cr.spearman_rho = 0.0;  // constant scores (e.g. exact mode); no ranking signal
            }
        }
    }

    std::vector<std::pair<double, double>> loglik_pairs;
    std::vector<std::pair<double, double>> neg_mode_pairs;
    double sum_stable = 0.0, sum_unstable = 0.0, sum_rho = 0.0;
    for (const SelectionConditionReport& cr : report.conditions) {
        const StabilityRecord& stable = cr.records[cr.stable_seed];
        const StabilityRecord& unstable = cr.records[cr.unstable_seed];
        loglik_pairs.push_back({stable.quality.loglik, unstable.quality.loglik});
        neg_mode_pairs.push_back({-stable.quality.mode_dist, -unstable.quality.mode_dist});
        sum_stable += stable.quality.loglik;
        sum_unstable += unstable.quality.loglik;
        sum_rho += cr.spearman_rho;
    }
    const double nc = static_cast<double>(report.conditions.size());
    report.winning_rate_loglik = winning_rate(loglik_pairs);
    report.winning_rate_neg_mode_dist = winning_rate(neg_mode_pairs);
    report.mean_stable_loglik = sum_stable / nc;
    report.mean_unstable_loglik = sum_unstable / nc;
    report.mean_spearman_rho = sum_rho / nc;
    return report;
}

OptimizationReport run_optimization_experiment(const ExperimentConfig& cfg,
                                               const std::vector<MixtureCondition>& suite) {
    const auto conditions = resolve_conditions(cfg, suite);
    const std::vector<std::size_t> sweep = cfg.t_sweep.empty()
                                               ? std::vector<std::size_t>{cfg.T}
                                               : cfg.t_sweep;

    struct WorkItem {
        const MixtureCondition* cond;
        std::size_t T;
        std::uint64_t seed;
    };
    std::vector<WorkItem> items;
    for (const MixtureCondition* c : conditions) {
        for (std::size_t T : sweep) {
            for (std::size_t s = 0; s < cfg.seeds.count; ++s) {
                items.push_back({c, T, cfg.seeds.begin + s});
            }
        }
    }

    OptimizationReport report;
    report.artifact_version = kArtifactVersion;
    report.config_hash = config_hash(cfg);
    report.runs.resize(items.size());

    parallel_for(items.size(), cfg.jobs, [&](std::size_t i) {
        const WorkItem& it = items[i];
        const Pipeline pipeline = build_pipeline(cfg, it.T);
        const MixtureCondition& c = *it.cond;

        OptimizationRunReport& run = report.runs[i];
        run.condition = c.name;
        run.T = it.T;
        run.seed = it.seed;

        const NoiseVector eps0 = gaussian_vector(it.seed, c.dim);
        const RoundTripFn rt = [&](const NoiseVector& e) {
            return round_trip(e, c, pipeline).eps_prime;
        };

        // the original arm: one explicit round trip
        const RoundTripResult original = round_trip(eps0, c, pipeline);
        run.loss_initial = 1.0 - stability_score(eps0, original.eps_prime);
        run.loglik_original = sample_quality(original.x0, c).loglik;

        OptimizeOptions opt = cfg.optimization;
        try {
            OptimizeResult res = optimize_noise(eps0, rt, opt);
            run.iterations = res.trace.iterates.size();
            const RoundTripResult fin = round_trip(res.trace.final, c, pipeline);
            run.loss_final = 1.0 - stability_score(res.trace.final, fin.eps_prime);
            run.loglik_final = sample_quality(fin.x0, c).loglik;
            if (res.trace.best_loss) {
                run.loss_best = *res.trace.best_loss;
                const Trajectory bt = denoise(res.trace.best, c, pipeline);
                run.loglik_best = sample_quality(bt.states.back(), c).loglik;
            } else {
                run.loss_best = run.loss_initial;
                run.loglik_best = run.loglik_original;
            }
        } catch (const DivergenceError& e) {
            run.diverged = true;
            run.iterations = e.trace().iterates.size();
            run.loss_final = 0.0;
            run.loglik_final = 0.0;
            run.loss_best = e.trace().best_loss.value_or(run.loss_initial);
            run.loglik_best = 0.0;
        }
    });

    // (condition, T) aggregates in item order
    for (const MixtureCondition* c : conditions) {
        for (std::size_t T : sweep) {
            OptimizationCellReport cell;
            cell.condition = c->name;
            cell.T = T;
            std::vector<std::pair<double, double>> fin_pairs, best_pairs;
            double li = 0.0, lf = 0.0, lb = 0.0;
            for (const OptimizationRunReport& run : report.runs) {
                if (run.condition != c->name || run.T != T) {
                    continue;
                }
                ++cell.runs;
                if (run.diverged) {
                    ++cell.diverged;
                    continue;
                }
                li += run.loss_initial;
                lf += run.loss_final;
                lb += run.loss_best;
                fin_pairs.push_back({run.loglik_final, run.loglik_original});
                best_pairs.push_back({run.loglik_best, run.loglik_original});
            }
            const std::size_t ok = cell.runs - cell.diverged;
            if (ok > 0) {
                cell.mean_loss_initial = li / static_cast<double>(ok);
                cell.mean_loss_final = lf / static_cast<double>(ok);
                cell.mean_loss_best = lb / static_cast<double>(ok);
                cell.winning_rate_final_loglik = winning_rate(fin_pairs);
                cell.winning_rate_best_loglik = winning_rate(best_pairs);
            }
            report.cells.push_back(std::move(cell));
        }
    }

    std::vector<std::pair<double, double>> fin_pairs, best_pairs;
    double li = 0.0, lf = 0.0;
    std::size_t ok = 0;
    for (const OptimizationRunReport& run : report.runs) {
        if (run.diverged) {
            continue;
        }
        ++ok;
        li += run.loss_initial;
        lf += run.loss_final;
        fin_pairs.push_back({run.loglik_final, run.loglik_original});
        best_pairs.push_back({run.loglik_best, run.loglik_original});
    }
    if (ok > 0) {
        report.winning_rate_final_loglik = winning_rate(fin_pairs);
        report.winning_rate_best_loglik = winning_rate(best_pairs);
        report.mean_loss_initial = li / static_cast<double>(ok);
        report.mean_loss_final = lf / static_cast<double>(ok);
    }
    return report;
}

void write_selection_report(const SelectionReport& rep, const ExperimentConfig& cfg,
                            const std::string& out_dir) {
    ensure_dir(out_dir);
    const std::filesystem::path dir(out_dir);

    {
        std::ofstream os = open_out((dir / "selection_records.csv").string());
        os << "condition,seed,score,loglik,mode_dist,mahalanobis,norm_eps,norm_eps_prime\n";
        for (const SelectionConditionReport& cr : rep.conditions) {
            for (const StabilityRecord& r : cr.records) {
                os << cr.condition << "," << r.seed << "," << fmt_g17(r.score) << ","
                   << fmt_g17(r.quality.loglik) << "," << fmt_g17(r.quality.mode_dist) << ","
                   << fmt_g17(r.quality.mahalanobis) << "," << fmt_g17(norm(r.epsilon)) << ","
                   << fmt_g17(norm(r.epsilon_prime)) << "\n";
            }
        }
    }
    {
        std::ofstream os = open_out((dir / "selection_summary.csv").string());
        os << "condition,k,stable_seed,stable_score,stable_loglik,unstable_seed,unstable_score,"
              "unstable_loglik,spearman_rho\n";
        for (const SelectionConditionReport& cr : rep.conditions) {
            const StabilityRecord& st = cr.records[cr.stable_seed];
            const StabilityRecord& un = cr.records[cr.unstable_seed];
            os << cr.condition << "," << cr.k << "," << st.seed << "," << fmt_g17(st.score) << ","
               << fmt_g17(st.quality.loglik) << "," << un.seed << "," << fmt_g17(un.score) << ","
               << fmt_g17(un.quality.loglik) << "," << fmt_g17(cr.spearman_rho) << "\n";
        }
    }
    {
        json j = provenance(cfg);
        j["conditions"] = json::array();
        for (const SelectionConditionReport& cr : rep.conditions) {
            const StabilityRecord& st = cr.records[cr.stable_seed];
            const StabilityRecord& un = cr.records[cr.unstable_seed];
            json cj;
            cj["condition"] = cr.condition;
            cj["k"] = cr.k;
            cj["stable"] = {{"seed", st.seed},
                            {"score", st.score},
                            {"loglik", st.quality.loglik},
                            {"mode_dist", st.quality.mode_dist},
                            {"mahalanobis", st.quality.mahalanobis}};
            cj["unstable"] = {{"seed", un.seed},
                              {"score", un.score},
                              {"loglik", un.quality.loglik},
                              {"mode_dist", un.quality.mode_dist},
                              {"mahalanobis", un.quality.mahalanobis}};
            cj["spearman_rho"] = cr.spearman_rho;
            j["conditions"].push_back(cj);
        }
        j["aggregates"] = {{"winning_rate_stable_loglik", rep.winning_rate_loglik},
                           {"winning_rate_stable_neg_mode_dist", rep.winning_rate_neg_mode_dist},
                           {"mean_stable_loglik", rep.mean_stable_loglik},
                           {"mean_unstable_loglik", rep.mean_unstable_loglik},
                           {"mean_spearman_rho", rep.mean_spearman_rho}};
        std::ofstream os = open_out((dir / "selection_report.json").string());
        os << j.dump(2) << "\n";
    }
    if (cfg.plots) {
        for (const SelectionConditionReport& cr : rep.conditions) {
            std::vector<double> xs, ys;
            for (const StabilityRecord& r : cr.records) {
                xs.push_back(r.score);
                ys.push_back(r.quality.loglik);
            }
            write_scatter_svg((dir / ("scatter_" + cr.condition + ".svg")).string(),
                              "stability vs log-likelihood: " + cr.condition, xs, ys,
                              "stability score", "loglik");
        }
    }
}

void write_optimization_report(const OptimizationReport& rep, const ExperimentConfig& cfg,
                               const std::string& out_dir) {
    ensure_dir(out_dir);
    const std::filesystem::path dir(out_dir);

    {
        std::ofstream os = open_out((dir / "optimization_runs.csv").string());
        os << "condition,T,seed,status,iterations,loss_initial,loss_final,loss_best,"
              "loglik_original,loglik_final,loglik_best\n";
        for (const OptimizationRunReport& r : rep.runs) {
            os << r.condition << "," << r.T << "," << r.seed << ","
               << (r.diverged ? "diverged" : "ok") << "," << r.iterations << ","
               << fmt_g17(r.loss_initial) << ",";
            if (r.diverged) {
                os << ",," << fmt_g17(r.loglik_original) << ",,\n";
            } else {
                os << fmt_g17(r.loss_final) << "," << fmt_g17(r.loss_best) << ","
                   << fmt_g17(r.loglik_original) << "," << fmt_g17(r.loglik_final) << ","
                   << fmt_g17(r.loglik_best) << "\n";
            }
        }
    }
    {
        std::ofstream os = open_out((dir / "optimization_summary.csv").string());
        os << "condition,T,runs,diverged,mean_loss_initial,mean_loss_final,mean_loss_best,"
              "winning_rate_final_loglik,winning_rate_best_loglik\n";
        for (const OptimizationCellReport& c : rep.cells) {
            os << c.condition << "," << c.T << "," << c.runs << "," << c.diverged << ","
               << fmt_g17(c.mean_loss_initial) << "," << fmt_g17(c.mean_loss_final) << ","
               << fmt_g17(c.mean_loss_best) << "," << fmt_g17(c.winning_rate_final_loglik) << ","
               << fmt_g17(c.winning_rate_best_loglik) << "\n";
        }
    }
    {
        json j = provenance(cfg);
        j["cells"] = json::array();
        for (const OptimizationCellReport& c : rep.cells) {
            j["cells"].push_back({{"condition", c.condition},
                                  {"T", c.T},
                                  {"runs", c.runs},
                                  {"diverged", c.diverged},
                                  {"mean_loss_initial", c.mean_loss_initial},
                                  {"mean_loss_final", c.mean_loss_final},
                                  {"mean_loss_best", c.mean_loss_best},
                                  {"winning_rate_final_loglik", c.winning_rate_final_loglik},
                                  {"winning_rate_best_loglik", c.winning_rate_best_loglik}});
        }
        j["aggregates"] = {{"winning_rate_final_loglik", rep.winning_rate_final_loglik},
                           {"winning_rate_best_loglik", rep.winning_rate_best_loglik},
                           {"mean_loss_initial", rep.mean_loss_initial},
                           {"mean_loss_final", rep.mean_loss_final},
                           {"runs", rep.runs.size()}};
        std::ofstream os = open_out((dir / "optimization_report.json").string());
        os << j.dump(2) << "\n";
    }
}

}  // namespace noiselab
