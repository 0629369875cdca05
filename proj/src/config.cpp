// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#include "noiselab/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "noiselab/errors.hpp"

namespace noiselab {

using json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

json parse(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw ConfigError(std::string(what) + ": malformed JSON");
    }
    return j;
}

Family family_from_string(const std::string& s) {
    if (s == "ddim") {
        return Family::ddim;
    }
    if (s == "edm") {
        return Family::edm;
    }
    throw ConfigError("family: expected 'ddim' or 'edm', got '" + s + "'");
}

TrajectoryMode mode_from_string(const std::string& s) {
    if (s == "approx") {
        return TrajectoryMode::approx;
    }
    if (s == "exact") {
        return TrajectoryMode::exact;
    }
    throw ConfigError("inversion_mode: expected 'approx' or 'exact', got '" + s + "'");
}

LrSchedule lr_schedule_from_string(const std::string& s) {
    if (s == "constant") {
        return LrSchedule::constant;
    }
    if (s == "cosine_annealing") {
        return LrSchedule::cosine_annealing;
    }
    throw ConfigError("lr_schedule: expected 'constant' or 'cosine_annealing', got '" + s + "'");
}

ReturnPolicy return_policy_from_string(const std::string& s) {
    if (s == "last") {
        return ReturnPolicy::last;
    }
    if (s == "best") {
        return ReturnPolicy::best;
    }
    throw ConfigError("return_policy: expected 'last' or 'best', got '" + s + "'");
}

BetaKind beta_kind_from_string(const std::string& s) {
    if (s == "linear") {
        return BetaKind::linear;
    }
    if (s == "cosine") {
        return BetaKind::cosine;
    }
    throw ConfigError("schedule.kind: expected 'linear' or 'cosine', got '" + s + "'");
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
    const json j = parse(text, "config");
    ExperimentConfig cfg;
    try {
        if (j.contains("conditions") && !j["conditions"].is_null()) {
            if (j["conditions"].is_string()) {
                const std::string s = j["conditions"].get<std::string>();
                if (s != "all") {
                    cfg.conditions = {s};
                }
            } else {
                cfg.conditions = j["conditions"].get<std::vector<std::string>>();
            }
        }
        if (j.contains("family")) {
            cfg.family = family_from_string(j["family"].get<std::string>());
        }
        if (j.contains("T")) {
            cfg.T = j["T"].get<std::size_t>();
        }
        if (j.contains("schedule")) {
            const json& s = j["schedule"];
            if (s.contains("kind")) {
                cfg.schedule.kind = beta_kind_from_string(s["kind"].get<std::string>());
            }
            if (s.contains("beta_start") && !s["beta_start"].is_null()) {
                cfg.schedule.beta_start = s["beta_start"].get<double>();
            }
            if (s.contains("beta_end") && !s["beta_end"].is_null()) {
                cfg.schedule.beta_end = s["beta_end"].get<double>();
            }
        }
        if (j.contains("edm")) {
            const json& e = j["edm"];
            if (e.contains("steps")) {
                cfg.edm.steps = e["steps"].get<std::size_t>();
            }
            if (e.contains("sigma_min")) {
                cfg.edm.sigma_min = e["sigma_min"].get<double>();
            }
            if (e.contains("sigma_max")) {
                cfg.edm.sigma_max = e["sigma_max"].get<double>();
            }
            if (e.contains("rho")) {
                cfg.edm.rho = e["rho"].get<double>();
            }
            if (e.contains("sigma_data")) {
                cfg.edm.sigma_data = e["sigma_data"].get<double>();
            }
        }
        if (j.contains("inversion_mode")) {
            cfg.inversion_mode = mode_from_string(j["inversion_mode"].get<std::string>());
        }
        if (j.contains("lagged_inversion_coeff") && j["lagged_inversion_coeff"].get<bool>()) {
            cfg.inversion_coeff = InversionCoeff::lagged;
        }
        if (j.contains("fixed_point")) {
            const json& f = j["fixed_point"];
            if (f.contains("tol")) {
                cfg.fixed_point.tol = f["tol"].get<double>();
            }
            if (f.contains("max_iter")) {
                cfg.fixed_point.max_iter = f["max_iter"].get<int>();
            }
        }
        if (j.contains("k")) {
            cfg.k = j["k"].get<std::size_t>();
        }
        if (j.contains("optimization")) {
            const json& o = j["optimization"];
            if (o.contains("steps")) {
                cfg.optimization.steps = o["steps"].get<std::size_t>();
            }
            if (o.contains("lr")) {
                cfg.optimization.lr = o["lr"].get<double>();
            }
            if (o.contains("momentum")) {
                cfg.optimization.momentum = o["momentum"].get<double>();
            }
            if (o.contains("lr_schedule")) {
                cfg.optimization.lr_schedule =
                    lr_schedule_from_string(o["lr_schedule"].get<std::string>());
            }
            if (o.contains("return_policy")) {
                cfg.optimization.return_policy =
                    return_policy_from_string(o["return_policy"].get<std::string>());
            }
        }
        if (j.contains("seeds")) {
            const json& s = j["seeds"];
            if (s.contains("begin")) {
                cfg.seeds.begin = s["begin"].get<std::uint64_t>();
            }
            if (s.contains("count")) {
                cfg.seeds.count = s["count"].get<std::size_t>();
            }
        }
        if (j.contains("t_sweep") && !j["t_sweep"].is_null()) {
            cfg.t_sweep = j["t_sweep"].get<std::vector<std::size_t>>();
        }
        if (j.contains("out_dir")) {
            cfg.out_dir = j["out_dir"].get<std::string>();
        }
        if (j.contains("jobs")) {
            cfg.jobs = j["jobs"].get<std::size_t>();
        }
        if (j.contains("plots")) {
            cfg.plots = j["plots"].get<bool>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig config_from_json_file(const std::string& path) {
    return config_from_json_text(read_file(path));
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
    json j;
    if (cfg.conditions.empty()) {
        j["conditions"] = "all";
    } else {
        j["conditions"] = cfg.conditions;
    }
    j["family"] = cfg.family == Family::ddim ? "ddim" : "edm";
    j["T"] = cfg.T;
    j["schedule"]["kind"] = cfg.schedule.kind == BetaKind::linear ? "linear" : "cosine";
    j["schedule"]["beta_start"] =
        cfg.schedule.beta_start ? json(*cfg.schedule.beta_start) : json(nullptr);
    j["schedule"]["beta_end"] = cfg.schedule.beta_end ? json(*cfg.schedule.beta_end) : json(nullptr);
    j["edm"] = {{"steps", cfg.edm.steps},
                {"sigma_min", cfg.edm.sigma_min},
                {"sigma_max", cfg.edm.sigma_max},
                {"rho", cfg.edm.rho},
                {"sigma_data", cfg.edm.sigma_data}};
    j["inversion_mode"] = cfg.inversion_mode == TrajectoryMode::exact ? "exact" : "approx";
    j["lagged_inversion_coeff"] = cfg.inversion_coeff == InversionCoeff::lagged;
    j["fixed_point"] = {{"tol", cfg.fixed_point.tol}, {"max_iter", cfg.fixed_point.max_iter}};
    j["k"] = cfg.k;
    j["optimization"] = {
        {"steps", cfg.optimization.steps},
        {"lr", cfg.optimization.lr},
        {"momentum", cfg.optimization.momentum},
        {"lr_schedule",
         cfg.optimization.lr_schedule == LrSchedule::constant ? "constant" : "cosine_annealing"},
        {"return_policy",
         cfg.optimization.return_policy == ReturnPolicy::best ? "best" : "last"}};
    j["seeds"] = {{"begin", cfg.seeds.begin}, {"count", cfg.seeds.count}};
    j["t_sweep"] = cfg.t_sweep;
    j["out_dir"] = cfg.out_dir;
    j["jobs"] = cfg.jobs;
    j["plots"] = cfg.plots;
    return j.dump(2) + "\n";
}

std::string config_canonical_text(const ExperimentConfig& cfg) {
    // execution-only fields (jobs, out_dir, plots) do not affect results and
    // stay out of the canonical form, so reports are byte-identical across
    // pool sizes and output locations
    json j = json::parse(config_to_json_text(cfg));
    j.erase("jobs");
    j.erase("out_dir");
    j.erase("plots");
    return j.dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig& cfg) {
    // FNV-1a 64 over the canonical JSON text
    const std::string text = config_canonical_text(cfg);
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

void apply_paper_defaults(ExperimentConfig& cfg) {
    cfg.k = 100;
    cfg.optimization.steps = 100;
    cfg.optimization.lr = 100.0;
    cfg.optimization.momentum = 0.5;
    cfg.optimization.lr_schedule = LrSchedule::cosine_annealing;
}

Pipeline build_pipeline(const ExperimentConfig& cfg, std::optional<std::size_t> t_override) {
    const std::size_t T = t_override.value_or(cfg.family == Family::ddim ? cfg.T : cfg.edm.steps);
    Pipeline p;
    if (cfg.family == Family::ddim) {
        const auto [def_start, def_end] = default_beta_bounds(T);
        p = Pipeline::make_ddim(build_ddpm_schedule(T, cfg.schedule.beta_start.value_or(def_start),
                                                    cfg.schedule.beta_end.value_or(def_end),
                                                    cfg.schedule.kind));
    } else {
        p = Pipeline::make_edm(build_edm_schedule(T, cfg.edm.sigma_min, cfg.edm.sigma_max,
                                                  cfg.edm.rho, cfg.edm.sigma_data));
    }
    p.inversion_mode = cfg.inversion_mode;
    p.inversion_coeff = cfg.inversion_coeff;
    p.fixed_point = cfg.fixed_point;
    return p;
}

namespace {

Covariance covariance_from_json(const json& j, std::size_t dim) {
    if (j.is_number()) {
        return Covariance::iso(j.get<double>());
    }
    const std::string type = j.value("type", "isotropic");
    if (type == "isotropic") {
        return Covariance::iso(j.value("variance", 1.0));
    }
    if (type == "full") {
        const auto rows = j.at("matrix").get<std::vector<std::vector<double>>>();
        if (rows.size() != dim) {
            throw ConfigError("covariance matrix has wrong row count");
        }
        SymMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            if (rows[i].size() != dim) {
                throw ConfigError("covariance matrix has wrong column count");
            }
            for (std::size_t k = 0; k < dim; ++k) {
                m.at(i, k) = rows[i][k];
            }
        }
        return Covariance::dense(std::move(m));
    }
    throw ConfigError("covariance.type: expected 'isotropic' or 'full', got '" + type + "'");
}

json covariance_to_json(const Covariance& c, std::size_t dim) {
    json j;
    if (c.isotropic) {
        j["type"] = "isotropic";
        j["variance"] = c.variance;
    } else {
        j["type"] = "full";
        std::vector<std::vector<double>> rows(dim, std::vector<double>(dim));
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t k = 0; k < dim; ++k) {
                rows[i][k] = c.full.at(i, k);
            }
        }
        j["matrix"] = rows;
    }
    return j;
}

MixtureCondition condition_from_json(const json& j) {
    MixtureCondition c;
    try {
        c.name = j.at("name").get<std::string>();
        c.dim = j.at("dim").get<std::size_t>();
        c.weights = j.at("weights").get<std::vector<double>>();
        c.means = j.at("means").get<std::vector<NoiseVector>>();
        if (j.contains("covariances")) {
            for (const json& cj : j.at("covariances")) {
                c.covariances.push_back(covariance_from_json(cj, c.dim));
            }
        } else {
            c.covariances.assign(c.weights.size(), Covariance::iso(1.0));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("condition: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace

std::vector<MixtureCondition> conditions_from_json_text(const std::string& text) {
    const json j = parse(text, "conditions");
    std::vector<MixtureCondition> suite;
    for (const json& cj : j.at("conditions")) {
        suite.push_back(condition_from_json(cj));
    }
    if (suite.empty()) {
        throw ConfigError("conditions: suite is empty");
    }
    return suite;
}

std::vector<MixtureCondition> conditions_from_json_file(const std::string& path) {
    return conditions_from_json_text(read_file(path));
}

std::string conditions_to_json_text(const std::vector<MixtureCondition>& suite) {
    json out;
    out["conditions"] = json::array();
    for (const MixtureCondition& c : suite) {
        json cj;
        cj["name"] = c.name;
        cj["dim"] = c.dim;
        cj["weights"] = c.weights;
        cj["means"] = c.means;
        cj["covariances"] = json::array();
        for (const Covariance& cov : c.covariances) {
            cj["covariances"].push_back(covariance_to_json(cov, c.dim));
        }
        out["conditions"].push_back(cj);
    }
    return out.dump(2) + "\n";
}

}  // namespace noiselab
