// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0
//
// noiselab CLI: denoise/invert single noises, score inversion stability,
// select and optimize noises, and run the batch experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "noiselab/config.hpp"
#include "noiselab/experiment.hpp"
#include "noiselab/optimize.hpp"
#include "noiselab/rng.hpp"
#include "noiselab/selection.hpp"
#include "noiselab/stability.hpp"
#include "noiselab/svg.hpp"
#include "noiselab/vector_io.hpp"
#include "noiselab/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace noiselab;

namespace {

struct CommonOpts {
    std::string condition;
    std::string conditions_file;
    std::string family = "ddim";
    std::size_t T = 4;
    std::string mode = "approx";
    bool lagged_inversion_coeff = false;
    double fp_tol = 1e-10;
    int fp_max_iter = 50;
};

std::vector<MixtureCondition> load_suite(const CommonOpts& o) {
    if (!o.conditions_file.empty()) {
        return conditions_from_json_file(o.conditions_file);
    }
    return default_condition_suite();
}

Pipeline make_pipeline(const CommonOpts& o) {
    ExperimentConfig cfg;
    cfg.family = o.family == "edm" ? Family::edm : Family::ddim;
    cfg.T = o.T;
    cfg.edm.steps = o.T;
    cfg.inversion_mode = o.mode == "exact" ? TrajectoryMode::exact : TrajectoryMode::approx;
    if (o.lagged_inversion_coeff) {
        cfg.inversion_coeff = InversionCoeff::lagged;
    }
    cfg.fixed_point.tol = o.fp_tol;
    cfg.fixed_point.max_iter = o.fp_max_iter;
    return build_pipeline(cfg);
}

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_condition = true) {
    if (needs_condition) {
        cmd->add_option("--condition", o.condition, "condition name")->required();
    }
    cmd->add_option("--conditions", o.conditions_file, "condition suite JSON file");
    cmd->add_option("--family", o.family, "sampler family")
        ->check(CLI::IsMember({"ddim", "edm"}));
    cmd->add_option("-T,--steps-count", o.T, "denoising steps");
    cmd->add_option("--mode", o.mode, "inversion mode")->check(CLI::IsMember({"approx", "exact"}));
    cmd->add_flag("--lagged-inversion-coeff", o.lagged_inversion_coeff,
                  "weight the inversion predictor term by the lagged step's abar instead of the exact inverse");
    cmd->add_option("--fp-tol", o.fp_tol, "fixed-point tolerance (exact mode)");
    cmd->add_option("--fp-max-iter", o.fp_max_iter, "fixed-point iteration cap (exact mode)");
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

int fail_with_json(const std::string& kind, const std::string& message) {
    json j;
    j["error"] = {{"type", kind}, {"message", message}};
    std::cerr << j.dump() << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"noiselab: noise-space toolkit for diffusion samplers on an analytic testbed"};
    app.set_version_flag("--version", kArtifactVersion);
    app.require_subcommand(1);

    // --- sample ---
    auto* sample_cmd = app.add_subcommand("sample", "draw a seeded unit Gaussian noise vector");
    std::uint64_t sample_seed = 0;
    std::size_t sample_dim = 16;
    std::string sample_out;
    sample_cmd->add_option("--seed", sample_seed, "seed")->required();
    sample_cmd->add_option("--dim", sample_dim, "dimension")->required();
    sample_cmd->add_option("--out", sample_out, "output vector file (default: stdout)");

    // --- denoise ---
    auto* den_cmd = app.add_subcommand("denoise", "run the denoising pass from a seeded noise");
    CommonOpts den_o;
    std::optional<std::uint64_t> den_seed;
    std::string den_input, den_out, den_traj;
    bool den_stochastic = false;
    std::uint64_t den_noise_seed = 0;
    add_common(den_cmd, den_o);
    den_cmd->add_option("--seed", den_seed, "seed for the input noise");
    den_cmd->add_option("--input", den_input, "input noise vector file");
    den_cmd->add_option("--out", den_out, "write x0 vector file");
    den_cmd->add_option("--trajectory", den_traj, "write trajectory CSV");
    den_cmd->add_flag("--stochastic", den_stochastic, "ancestral sampling (generation only)");
    den_cmd->add_option("--noise-seed", den_noise_seed, "per-step noise seed (stochastic mode)");

    // --- invert ---
    auto* inv_cmd = app.add_subcommand("invert", "invert a sample back into a noise");
    CommonOpts inv_o;
    std::string inv_input, inv_out, inv_traj;
    add_common(inv_cmd, inv_o);
    inv_cmd->add_option("--input", inv_input, "input sample vector file")->required();
    inv_cmd->add_option("--out", inv_out, "write eps' vector file");
    inv_cmd->add_option("--trajectory", inv_traj, "write trajectory CSV");

    // --- stability ---
    auto* st_cmd = app.add_subcommand("stability", "score round-trip stability of seeded noises");
    CommonOpts st_o;
    std::size_t st_k = 1;
    std::vector<std::uint64_t> st_seeds;
    std::string st_csv;
    add_common(st_cmd, st_o);
    st_cmd->add_option("--k", st_k, "score seeds 0..K-1");
    st_cmd->add_option("--seed", st_seeds, "explicit seed (repeatable)");
    st_cmd->add_option("--csv", st_csv, "write batch CSV");

    // --- select ---
    auto* sel_cmd = app.add_subcommand("select", "pick the most (or least) stable of K noises");
    CommonOpts sel_o;
    std::size_t sel_k = 100;
    std::string sel_objective = "max";
    std::string sel_out_dir = ".";
    std::size_t sel_jobs = 0;
    add_common(sel_cmd, sel_o);
    sel_cmd->add_option("--k", sel_k, "number of seeds");
    sel_cmd->add_option("--objective", sel_objective, "max or min")
        ->check(CLI::IsMember({"max", "min"}));
    sel_cmd->add_option("--out", sel_out_dir, "output directory");
    sel_cmd->add_option("--jobs", sel_jobs, "worker threads (0 = hardware)");

    // --- optimize ---
    auto* opt_cmd = app.add_subcommand("optimize", "gradient-descend a noise toward a fixed point");
    CommonOpts opt_o;
    std::uint64_t opt_seed = 0;
    OptimizeOptions opt_opts;
    bool opt_anneal = true;
    bool opt_constant_lr = false;
    std::string opt_return = "last";
    std::string opt_out_dir = ".";
    std::string opt_svg;
    bool opt_paper_defaults = false;
    add_common(opt_cmd, opt_o);
    opt_cmd->add_option("--seed", opt_seed, "seed of the original noise")->required();
    opt_cmd->add_option("--steps", opt_opts.steps, "gradient descent steps");
    opt_cmd->add_option("--lr", opt_opts.lr, "learning rate");
    opt_cmd->add_option("--momentum", opt_opts.momentum, "momentum coefficient");
    opt_cmd->add_flag("--anneal,!--no-anneal", opt_anneal, "cosine annealing (default on)");
    opt_cmd->add_flag("--constant-lr", opt_constant_lr, "shorthand for --no-anneal");
    opt_cmd->add_option("--return", opt_return, "return policy")
        ->check(CLI::IsMember({"last", "best"}));
    opt_cmd->add_option("--out", opt_out_dir, "output directory");
    opt_cmd->add_option("--svg", opt_svg, "write loss/stability SVG");
    opt_cmd->add_flag("--paper-defaults", opt_paper_defaults,
                      "n=100, lr=100, momentum=0.5, annealing");

    // --- experiment ---
    auto* exp_cmd = app.add_subcommand("experiment", "batch studies over the condition suite");
    exp_cmd->require_subcommand(1);
    std::string exp_config, exp_out, exp_conditions_file;
    std::optional<std::size_t> exp_jobs;
    bool exp_paper_defaults = false;
    auto add_exp_opts = [&](CLI::App* c) {
        c->add_option("--config", exp_config, "experiment config JSON");
        c->add_option("--out", exp_out, "output directory (overrides config)");
        c->add_option("--conditions", exp_conditions_file, "condition suite JSON file");
        c->add_option("--jobs", exp_jobs, "worker threads (overrides config)");
        c->add_flag("--paper-defaults", exp_paper_defaults, "K=100, n=100, lr=100, momentum=0.5");
    };
    auto* exp_sel = exp_cmd->add_subcommand("select", "stable vs unstable noise study");
    add_exp_opts(exp_sel);
    auto* exp_opt = exp_cmd->add_subcommand("optimize", "original vs optimized noise study");
    add_exp_opts(exp_opt);

    // --- conditions ---
    auto* cond_cmd = app.add_subcommand("conditions", "list or dump the condition suite");
    std::string cond_dump;
    std::string cond_file;
    cond_cmd->add_option("--conditions", cond_file, "condition suite JSON file");
    cond_cmd->add_option("--dump", cond_dump, "write the suite as JSON to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help / --version
        }
        json j;
        j["error"] = {{"type", "cli"}, {"message", e.what()}};
        std::cerr << j.dump() << "\n";
        return e.get_exit_code();
    }

    try {
        if (*sample_cmd) {
            const NoiseVector v = gaussian_vector(sample_seed, sample_dim);
            if (sample_out.empty()) {
                write_vector(std::cout, v);
            } else {
                write_vector_file(sample_out, v);
                print_json({{"seed", sample_seed}, {"dim", sample_dim}, {"out", sample_out}});
            }
        } else if (*den_cmd) {
            const auto suite = load_suite(den_o);
            const MixtureCondition& c = find_condition(suite, den_o.condition);
            Pipeline p = make_pipeline(den_o);
            p.stochastic = den_stochastic;
            p.stochastic_seed = den_noise_seed;
            NoiseVector eps;
            if (!den_input.empty()) {
                eps = read_vector_file(den_input);
            } else if (den_seed) {
                eps = gaussian_vector(*den_seed, c.dim);
            } else {
                throw ConfigError("denoise: provide --seed or --input");
            }
            const Trajectory traj = denoise(eps, c, p);
            const NoiseVector& x0 = traj.states.back();
            if (!den_out.empty()) {
                write_vector_file(den_out, x0);
            }
            if (!den_traj.empty()) {
                write_trajectory_csv(traj, p, den_traj);
            }
            print_json({{"condition", c.name},
                        {"family", den_o.family},
                        {"T", p.steps()},
                        {"stochastic", den_stochastic},
                        {"x0_norm", norm(x0)},
                        {"x0_loglik", sample_quality(x0, c).loglik}});
        } else if (*inv_cmd) {
            const auto suite = load_suite(inv_o);
            const MixtureCondition& c = find_condition(suite, inv_o.condition);
            const Pipeline p = make_pipeline(inv_o);
            const NoiseVector x0 = read_vector_file(inv_input);
            const Trajectory traj = invert(x0, c, p, p.inversion_mode);
            const NoiseVector eps_prime = noise_endpoint(traj, p);
            if (!inv_out.empty()) {
                write_vector_file(inv_out, eps_prime);
            }
            if (!inv_traj.empty()) {
                write_trajectory_csv(traj, p, inv_traj);
            }
            print_json({{"condition", c.name},
                        {"family", inv_o.family},
                        {"T", p.steps()},
                        {"mode", inv_o.mode},
                        {"eps_prime_norm", norm(eps_prime)}});
        } else if (*st_cmd) {
            const auto suite = load_suite(st_o);
            const MixtureCondition& c = find_condition(suite, st_o.condition);
            const Pipeline p = make_pipeline(st_o);
            std::vector<std::uint64_t> seeds = st_seeds;
            if (seeds.empty()) {
                for (std::uint64_t s = 0; s < st_k; ++s) {
                    seeds.push_back(s);
                }
            }
            std::ofstream csv;
            if (!st_csv.empty()) {
                csv.open(st_csv);
                if (!csv) {
                    throw ConfigError("cannot open '" + st_csv + "' for writing");
                }
                csv << "seed,score,x0_quality_loglik,norm_eps,norm_eps_prime\n";
            }
            for (std::uint64_t s : seeds) {
                const StabilityRecord rec = evaluate_seed(s, c, p);
                std::printf("%llu %.17g\n", static_cast<unsigned long long>(s), rec.score);
                if (csv.is_open()) {
                    csv << s << "," << fmt_g17(rec.score) << "," << fmt_g17(rec.quality.loglik)
                        << "," << fmt_g17(norm(rec.epsilon)) << ","
                        << fmt_g17(norm(rec.epsilon_prime)) << "\n";
                }
            }
        } else if (*sel_cmd) {
            const auto suite = load_suite(sel_o);
            const MixtureCondition& c = find_condition(suite, sel_o.condition);
            const Pipeline p = make_pipeline(sel_o);
            const Objective obj = sel_objective == "min" ? Objective::min : Objective::max;
            const SelectionResult res = select_noise(c, sel_k, p, obj, sel_jobs);
            fs::create_directories(sel_out_dir);
            {
                std::ofstream csv(fs::path(sel_out_dir) / "select_records.csv");
                csv << "seed,score,x0_quality_loglik,norm_eps,norm_eps_prime\n";
                for (const StabilityRecord& r : res.records) {
                    csv << r.seed << "," << fmt_g17(r.score) << "," << fmt_g17(r.quality.loglik)
                        << "," << fmt_g17(norm(r.epsilon)) << ","
                        << fmt_g17(norm(r.epsilon_prime)) << "\n";
                }
            }
            json summary = {{"condition", c.name},
                            {"k", sel_k},
                            {"chosen_seed", res.chosen().seed},
                            {"chosen_score", res.chosen().score},
                            {"objective", sel_objective}};
            {
                std::ofstream js(fs::path(sel_out_dir) / "select_summary.json");
                js << summary.dump(2) << "\n";
            }
            print_json(summary);
        } else if (*opt_cmd) {
            const auto suite = load_suite(opt_o);
            const MixtureCondition& c = find_condition(suite, opt_o.condition);
            const Pipeline p = make_pipeline(opt_o);
            if (opt_paper_defaults) {
                opt_opts.steps = 100;
                opt_opts.lr = 100.0;
                opt_opts.momentum = 0.5;
                opt_anneal = true;
            }
            opt_opts.lr_schedule = (opt_anneal && !opt_constant_lr) ? LrSchedule::cosine_annealing
                                                                    : LrSchedule::constant;
            opt_opts.return_policy =
                opt_return == "best" ? ReturnPolicy::best : ReturnPolicy::last;
            const NoiseVector eps0 = gaussian_vector(opt_seed, c.dim);
            const RoundTripFn rt = [&](const NoiseVector& e) {
                return round_trip(e, c, p).eps_prime;
            };
            const OptimizeResult res = optimize_noise(eps0, rt, opt_opts);
            fs::create_directories(opt_out_dir);
            {
                std::ofstream csv(fs::path(opt_out_dir) / "trace.csv");
                csv << "iter,loss,stability,lr,step_norm\n";
                for (const IterateRecord& it : res.trace.iterates) {
                    csv << it.index << "," << fmt_g17(it.loss) << "," << fmt_g17(it.stability)
                        << "," << fmt_g17(it.lr) << "," << fmt_g17(it.step_norm) << "\n";
                }
            }
            write_vector_file((fs::path(opt_out_dir) / "noise_final.txt").string(),
                              res.trace.final);
            write_vector_file((fs::path(opt_out_dir) / "noise_best.txt").string(), res.trace.best);
            if (!opt_svg.empty()) {
                SvgSeries loss{"loss", "#d62728", {}};
                SvgSeries stab{"stability", "#1f77b4", {}};
                for (const IterateRecord& it : res.trace.iterates) {
                    loss.y.push_back(it.loss);
                    stab.y.push_back(it.stability);
                }
                write_line_chart_svg(opt_svg, "noise optimization: " + c.name, {loss, stab});
            }
            json summary = {{"condition", c.name},
                            {"seed", opt_seed},
                            {"steps", opt_opts.steps},
                            {"lr", opt_opts.lr},
                            {"momentum", opt_opts.momentum},
                            {"return", opt_return},
                            {"loss_initial",
                             res.trace.iterates.empty() ? json(nullptr)
                                                        : json(res.trace.iterates.front().loss)},
                            {"loss_best", res.trace.best_loss ? json(*res.trace.best_loss)
                                                              : json(nullptr)}};
            {
                std::ofstream js(fs::path(opt_out_dir) / "optimize_summary.json");
                js << summary.dump(2) << "\n";
            }
            print_json(summary);
        } else if (*exp_cmd) {
            ExperimentConfig cfg;
            if (!exp_config.empty()) {
                cfg = config_from_json_file(exp_config);
            }
            if (exp_paper_defaults) {
                apply_paper_defaults(cfg);
            }
            if (!exp_out.empty()) {
                cfg.out_dir = exp_out;
            }
            if (exp_jobs) {
                cfg.jobs = *exp_jobs;
            }
            const auto suite = exp_conditions_file.empty()
                                   ? default_condition_suite()
                                   : conditions_from_json_file(exp_conditions_file);
            if (*exp_sel) {
                const SelectionReport rep = run_selection_experiment(cfg, suite);
                write_selection_report(rep, cfg, cfg.out_dir);
                print_json({{"experiment", "select"},
                            {"out_dir", cfg.out_dir},
                            {"conditions", rep.conditions.size()},
                            {"winning_rate_stable_loglik", rep.winning_rate_loglik},
                            {"mean_spearman_rho", rep.mean_spearman_rho},
                            {"config_hash", rep.config_hash}});
            } else {
                const OptimizationReport rep = run_optimization_experiment(cfg, suite);
                write_optimization_report(rep, cfg, cfg.out_dir);
                print_json({{"experiment", "optimize"},
                            {"out_dir", cfg.out_dir},
                            {"runs", rep.runs.size()},
                            {"winning_rate_final_loglik", rep.winning_rate_final_loglik},
                            {"winning_rate_best_loglik", rep.winning_rate_best_loglik},
                            {"config_hash", rep.config_hash}});
            }
        } else if (*cond_cmd) {
            const auto suite = cond_file.empty() ? default_condition_suite()
                                                 : conditions_from_json_file(cond_file);
            if (!cond_dump.empty()) {
                std::ofstream os(cond_dump);
                if (!os) {
                    throw ConfigError("cannot open '" + cond_dump + "' for writing");
                }
                os << conditions_to_json_text(suite);
            }
            json j = json::array();
            for (const MixtureCondition& c : suite) {
                j.push_back({{"name", c.name}, {"dim", c.dim}, {"components", c.components()}});
            }
            print_json(j);
        }
    } catch (const Error& e) {
        return fail_with_json(e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail_with_json("internal", e.what());
    }
    return 0;
}
