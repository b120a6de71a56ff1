#include "config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "tistop/error.hpp"
#include "tistop/solvers.hpp"

namespace tistop::cli {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

const json& field(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
    return j.at(key);
}

double number(const json& j, const std::string& where, const char* key) {
    const json& v = field(j, where, key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where + "." + key + ": must be finite");
    return d;
}

double number_or(const json& j, const std::string& where, const char* key, double fallback) {
    return j.contains(key) ? number(j, where, key) : fallback;
}

std::uint64_t count_or(const json& j, const std::string& where, const char* key, std::uint64_t fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw ConfigError(where + "." + key + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string text(const json& j, const std::string& where, const char* key) {
    const json& v = field(j, where, key);
    if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

DiffusionModel parse_model(const json& j) {
    require_object(j, "model");
    const std::string type = text(j, "model", "type");
    if (type == "gbm") {
        reject_unknown(j, "model", {"type", "mu", "sigma2"});
        const double sigma2 = number(j, "model", "sigma2");
        if (!(sigma2 > 0.0)) throw ConfigError("model.sigma2: must be positive");
        return DiffusionModel::gbm(number(j, "model", "mu"), sigma2);
    }
    if (type == "wiener") {
        reject_unknown(j, "model", {"type"});
        return DiffusionModel::wiener();
    }
    throw ConfigError("model.type: expected 'gbm' or 'wiener', got '" + type + "'");
}

Problem parse_problem(const json& j) {
    require_object(j, "problem");
    const std::string type = text(j, "problem", "type");
    if (type == "variance") {
        reject_unknown(j, "problem", {"type"});
        return make_variance_problem();
    }
    if (type == "mean-variance") {
        reject_unknown(j, "problem", {"type", "gamma"});
        return make_mean_variance_problem(number(j, "problem", "gamma"));
    }
    if (type == "two-equilibria") {
        reject_unknown(j, "problem", {"type"});
        return make_two_equilibria_problem();
    }
    throw ConfigError("problem.type: expected 'variance', 'mean-variance' or 'two-equilibria', got '" + type + "'");
}

SmoothFn parse_intensity(const json& j, const json& model_doc) {
    require_object(j, "strategy.intensity");
    const std::string where = "strategy.intensity";
    const std::string type = text(j, where, "type");
    if (type == "zero") {
        reject_unknown(j, where, {"type"});
        return SmoothFn::constant_fn(0.0);
    }
    if (type == "constant") {
        reject_unknown(j, where, {"type", "value"});
        const double v = number(j, where, "value");
        if (v < 0.0) throw ConfigError(where + ".value: intensity must be non-negative");
        return SmoothFn::constant_fn(v);
    }
    if (type == "variance-equilibrium") {
        reject_unknown(j, where, {"type"});
        if (model_doc.at("type") != "gbm") throw ConfigError(where + ": variance-equilibrium needs a gbm model");
        return SmoothFn::constant_fn(
            solve_variance_gbm(model_doc.at("mu").get<double>(), model_doc.at("sigma2").get<double>()).lambda);
    }
    if (type == "power") {
        reject_unknown(j, where, {"type", "a", "p"});
        const double a = number(j, where, "a");
        if (a < 0.0) throw ConfigError(where + ".a: intensity must be non-negative");
        return SmoothFn::power(a, number(j, where, "p"));
    }
    throw ConfigError(where + ".type: expected 'zero', 'constant', 'variance-equilibrium' or 'power', got '" + type +
                      "'");
}

double threshold_b(const json& model_doc, const json& problem_doc) {
    if (model_doc.at("type") != "gbm" || problem_doc.at("type") != "mean-variance")
        throw ConfigError("strategy.continuation: mean-variance-threshold needs a gbm model and the mean-variance problem");
    const double mu = model_doc.at("mu").get<double>();
    const double sigma2 = model_doc.at("sigma2").get<double>();
    const double gamma = problem_doc.at("gamma").get<double>();
    const double xi = 2.0 * mu / sigma2;
    if (!(xi > 0.0 && xi < 1.0))
        throw ParameterError("mean-variance-threshold needs 0 < 2 mu / sigma^2 < 1");
    return xi / (gamma * (1.0 - xi));
}

ContinuationSet parse_continuation(const json& j, const DiffusionModel& model, const json& model_doc,
                                   const json& problem_doc) {
    const std::string where = "strategy.continuation";
    const Interval& state = model.state_interval();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "empty") return ContinuationSet::empty();
        if (s == "whole") return ContinuationSet::whole(state);
        throw ConfigError(where + ": expected 'empty', 'whole', a list of intervals or an object, got '" + s + "'");
    }
    if (j.is_object()) {
        const std::string type = text(j, where, "type");
        if (type != "mean-variance-threshold") throw ConfigError(where + ".type: expected 'mean-variance-threshold'");
        reject_unknown(j, where, {"type", "scale"});
        const double scale = number_or(j, where, "scale", 1.0);
        if (!(scale > 0.0)) throw ConfigError(where + ".scale: must be positive");
        return ContinuationSet({{state.lo, scale * threshold_b(model_doc, problem_doc)}});
    }
    if (!j.is_array()) throw ConfigError(where + ": expected a string, array or object");
    std::vector<Interval> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& iv = j[i];
        const std::string w = where + "[" + std::to_string(i) + "]";
        if (!iv.is_array() || iv.size() != 2) throw ConfigError(w + ": expected [lo, hi] (null for an open end)");
        auto end = [&](const json& v, double fallback) {
            if (v.is_null()) return fallback;
            if (!v.is_number()) throw ConfigError(w + ": endpoints must be numbers or null");
            return v.get<double>();
        };
        out.push_back({end(iv[0], state.lo), end(iv[1], state.hi)});
    }
    ContinuationSet c(std::move(out));
    c.check_inside(state);
    return c;
}

GridSpec default_grid(const DiffusionModel& model) {
    if (model.scheme() == Scheme::GBM) return {0.05, 2.0, 50};
    return {-2.0, 2.0, 50};
}

}  // namespace

PathConfig MCSettings::path_config() const {
    PathConfig c;
    c.dt = dt;
    c.horizon = horizon;
    c.seed = seed;
    c.threads = threads;
    c.antithetic = antithetic;
    return c;
}

std::string to_string(ValuesMode mode) {
    switch (mode) {
        case ValuesMode::Auto: return "auto";
        case ValuesMode::ClosedForm: return "closed-form";
        case ValuesMode::MonteCarlo: return "monte-carlo";
    }
    return "auto";
}

RunConfig parse_run_config(const json& doc) {
    require_object(doc, "config");
    reject_unknown(doc, "config", {"schema", "model", "problem", "strategy", "grid", "values", "mc", "out"});
    const json& schema = field(doc, "config", "schema");
    if (!schema.is_number_integer() || schema.get<int>() != 1) throw ConfigError("config.schema: only schema 1 is supported");

    RunConfig cfg;
    const json& model_doc = field(doc, "config", "model");
    const json& problem_doc = field(doc, "config", "problem");
    cfg.model = parse_model(model_doc);
    cfg.problem = parse_problem(problem_doc);

    const json& st = field(doc, "config", "strategy");
    require_object(st, "strategy");
    reject_unknown(st, "strategy", {"label", "intensity", "continuation"});
    cfg.strategy.intensity = parse_intensity(field(st, "strategy", "intensity"), model_doc);
    cfg.strategy.continuation = parse_continuation(field(st, "strategy", "continuation"), cfg.model, model_doc, problem_doc);
    cfg.strategy.label = st.contains("label") ? text(st, "strategy", "label") : cfg.strategy.continuation.describe();

    cfg.grid = default_grid(cfg.model);
    if (doc.contains("grid")) {
        const json& g = doc.at("grid");
        require_object(g, "grid");
        reject_unknown(g, "grid", {"lo", "hi", "n"});
        cfg.grid.lo = number_or(g, "grid", "lo", cfg.grid.lo);
        cfg.grid.hi = number_or(g, "grid", "hi", cfg.grid.hi);
        cfg.grid.n = count_or(g, "grid", "n", cfg.grid.n);
        if (!(cfg.grid.lo <= cfg.grid.hi)) throw ConfigError("grid: lo must not exceed hi");
        if (cfg.grid.n == 0 || cfg.grid.n > 100000) throw ConfigError("grid.n: must be in [1, 100000]");
    }
    if (!cfg.model.in_state(cfg.grid.lo) || !cfg.model.in_state(cfg.grid.hi))
        throw ConfigError("grid: endpoints must lie inside the state interval " + cfg.model.describe());

    if (doc.contains("values")) {
        const std::string v = text(doc, "config", "values");
        if (v == "auto") cfg.values = ValuesMode::Auto;
        else if (v == "closed-form") cfg.values = ValuesMode::ClosedForm;
        else if (v == "monte-carlo") cfg.values = ValuesMode::MonteCarlo;
        else throw ConfigError("config.values: expected 'auto', 'closed-form' or 'monte-carlo', got '" + v + "'");
    }

    if (doc.contains("mc")) {
        const json& m = doc.at("mc");
        require_object(m, "mc");
        reject_unknown(m, "mc", {"paths", "dt", "horizon", "seed", "threads", "antithetic", "evidence_paths"});
        cfg.mc.paths = count_or(m, "mc", "paths", cfg.mc.paths);
        cfg.mc.dt = number_or(m, "mc", "dt", cfg.mc.dt);
        cfg.mc.horizon = number_or(m, "mc", "horizon", cfg.mc.horizon);
        cfg.mc.seed = count_or(m, "mc", "seed", cfg.mc.seed);
        cfg.mc.threads = static_cast<unsigned>(count_or(m, "mc", "threads", cfg.mc.threads));
        cfg.mc.evidence_paths = count_or(m, "mc", "evidence_paths", cfg.mc.evidence_paths);
        if (m.contains("antithetic")) {
            if (!m.at("antithetic").is_boolean()) throw ConfigError("mc.antithetic: expected a boolean");
            cfg.mc.antithetic = m.at("antithetic").get<bool>();
        }
    }
    cfg.mc.path_config().validate();

    if (doc.contains("out")) cfg.out = text(doc, "config", "out");
    cfg.document = doc;
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_run_config(doc);
}

json resolved_document(const RunConfig& cfg) {
    json d = cfg.document;
    d["strategy"]["label"] = cfg.strategy.label;
    d["grid"] = {{"lo", cfg.grid.lo}, {"hi", cfg.grid.hi}, {"n", cfg.grid.n}};
    d["values"] = to_string(cfg.values);
    d["mc"] = {{"paths", cfg.mc.paths},     {"dt", cfg.mc.dt},
               {"horizon", cfg.mc.horizon}, {"seed", cfg.mc.seed},
               {"threads", cfg.mc.threads}, {"antithetic", cfg.mc.antithetic},
               {"evidence_paths", cfg.mc.evidence_paths}};
    if (cfg.out) d["out"] = *cfg.out;
    return d;
}

}  // namespace tistop::cli
