#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "tistop/error.hpp"
#include "tistop/numerics.hpp"
#include "tistop/solvers.hpp"

namespace tistop::cli {

using nlohmann::json;

int exit_code(Verdict v) noexcept {
    switch (v) {
        case Verdict::Pass: return kExitPass;
        case Verdict::Fail: return kExitFail;
        case Verdict::Inconclusive: return kExitInconclusive;
    }
    return kExitInconclusive;
}

void GlobalOptions::apply(MCSettings& mc) const {
    if (seed) mc.seed = *seed;
    if (threads) mc.threads = *threads;
    if (paths) mc.paths = *paths;
    if (dt) mc.dt = *dt;
    if (horizon) mc.horizon = *horizon;
    mc.path_config().validate();
    if (mc.paths < 2) throw ParameterError("--paths must be at least 2");
}

MCSettings GlobalOptions::settings() const {
    MCSettings mc;
    apply(mc);
    return mc;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& os, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
        os << '\n';
    }
}

void write_text(const std::string& path, const std::string& content, std::ostream& fallback) {
    if (path == "-") {
        fallback << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open '" + path + "' for writing");
    f << content;
    if (!f) throw ConfigError("failed writing '" + path + "'");
}

namespace {

std::string csv_of(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    std::ostringstream os;
    write_csv(os, header, rows);
    return os.str();
}

template <class Fn>
std::vector<std::vector<double>> tabulate(const GridSpec& grid, Fn j) {
    std::vector<std::vector<double>> rows;
    for (double x : linspace(grid.lo, grid.hi, grid.n)) rows.push_back({x, j(x)});
    return rows;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int cmd_solve_variance(double mu, double sigma2, const GridSpec& grid, const GlobalOptions& g, std::ostream& out) {
    const VarianceSolution s = solve_variance_gbm(mu, sigma2);
    out << "lambda=" << format_double(s.lambda) << '\n'
        << "coefficient=" << format_double(s.j_coefficient) << '\n'
        << "psi_slope=" << format_double(s.psi_slope) << '\n'
        << "phi_coefficient=" << format_double(s.phi_coefficient) << '\n'
        << "J(x) = " << format_double(s.j_coefficient) << " x^2\n";
    if (g.out) {
        if (!(grid.lo >= 0.0)) throw ParameterError("--lo must be non-negative for GBM");
        write_text(*g.out, csv_of({"x", "J"}, tabulate(grid, [&](double x) { return s.j(x); })), out);
    }
    return kExitPass;
}

int cmd_solve_meanvariance(double mu, double sigma2, double gamma, const GridSpec& grid, const GlobalOptions& g,
                           std::ostream& out) {
    const MeanVarianceSolution s = solve_mean_variance_gbm(mu, sigma2, gamma);
    out << "regime=" << to_string(s.regime) << '\n' << "xi=" << format_double(s.xi) << '\n';
    if (s.b) out << "b=" << format_double(*s.b) << '\n';
    const bool has_value = s.regime == MeanVarianceRegime::Threshold || s.regime == MeanVarianceRegime::StopImmediately;
    if (g.out) {
        if (!has_value) throw ParameterError("no equilibrium value to tabulate in regime " + to_string(s.regime));
        if (!(grid.lo > 0.0)) throw ParameterError("--lo must be positive for GBM");
        write_text(*g.out, csv_of({"x", "J"}, tabulate(grid, [&](double x) { return s.j(x); })), out);
    }
    return kExitPass;
}

ValueFunctions resolve_values(const RunConfig& cfg, ValueMode* mode) {
    if (cfg.values != ValuesMode::MonteCarlo) {
        if (auto vf = closed_form_value_functions(cfg.problem, cfg.model, cfg.strategy)) {
            if (mode) *mode = ValueMode::ClosedForm;
            return *vf;
        }
        if (cfg.values == ValuesMode::ClosedForm)
            throw ConfigError("no closed-form value functions for this strategy; set values to 'monte-carlo'");
    }
    if (mode) *mode = ValueMode::MCGrid;
    const auto grid = report_grid(cfg.grid, cfg.model, cfg.strategy.continuation);
    return estimate_value_grid(cfg.problem, cfg.model, cfg.strategy, grid, cfg.mc.path_config(), cfg.mc.paths);
}

json report_to_json(const RunConfig& cfg, const EquilibriumReport& report, double runtime_seconds) {
    json verdicts = json::array();
    for (const auto& v : report.verdicts) {
        json points = json::array();
        for (const auto& p : v.points)
            points.push_back({{"x", p.x}, {"residual", p.residual}, {"tol", p.tol}, {"pass", p.pass}});
        json entry = {{"condition", to_string(v.condition)}, {"points", points}, {"overall", to_string(v.overall)}};
        if (!v.note.empty()) entry["note"] = v.note;
        verdicts.push_back(entry);
    }
    json doc = {{"config", resolved_document(cfg)},
                {"verdicts", verdicts},
                {"summary", to_string(report.summary)},
                {"runtime_seconds", runtime_seconds}};
    if (!report.evidence.empty()) {
        json ev = json::array();
        for (const auto& l : report.evidence) {
            json pts = json::array();
            for (const auto& p : l.points)
                pts.push_back({{"h", p.h}, {"gain", p.gain}, {"std_error", p.std_error}, {"mean_tau", p.mean_tau}});
            json e = {{"deviation", l.label}, {"x", l.x}, {"points", pts}};
            if (l.limit) e["limit"] = *l.limit;
            ev.push_back(e);
        }
        doc["evidence"] = ev;
    }
    return doc;
}

VerifyResult run_verify(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    VerifyResult r;
    const ValueFunctions vf = resolve_values(cfg, &r.mode);
    ReportOptions opt;
    opt.grid = cfg.grid;
    opt.config = cfg.mc.path_config();
    opt.evidence_paths = cfg.mc.evidence_paths;
    r.report = run_full_report(cfg.problem, cfg.model, cfg.strategy, vf, opt);
    r.json = report_to_json(cfg, r.report, seconds_since(t0));
    return r;
}

void print_report(std::ostream& os, const EquilibriumReport& report) {
    os << "strategy: " << report.strategy << '\n';
    for (const auto& v : report.verdicts) {
        std::size_t failed = 0;
        const PointResidual* worst = nullptr;
        for (const auto& p : v.points) {
            if (!p.pass) ++failed;
            const bool pick = !worst || (!p.pass && worst->pass) ||
                              (p.pass == worst->pass && std::abs(p.residual) > std::abs(worst->residual));
            if (pick) worst = &p;
        }
        os << "  " << std::left << std::setw(10) << to_string(v.condition) << std::setw(13) << to_string(v.overall)
           << v.points.size() << " points, " << failed << " outside tolerance";
        if (worst)
            os << "; worst residual " << format_double(worst->residual) << " at x=" << format_double(worst->x)
               << " (tol " << format_double(worst->tol) << ")";
        os << '\n';
        if (!v.note.empty()) os << "    note: " << v.note << '\n';
    }
    os << "summary: " << to_string(report.summary) << '\n';
}

int cmd_verify(const std::string& config_path, const GlobalOptions& g, std::ostream& out) {
    RunConfig cfg = load_run_config(config_path);
    g.apply(cfg.mc);
    if (g.out) cfg.out = *g.out;
    const VerifyResult r = run_verify(cfg);
    print_report(out, r.report);
    out << "values: " << (r.mode == ValueMode::ClosedForm ? "closed-form" : "monte-carlo") << '\n';
    if (cfg.out) {
        write_text(*cfg.out, r.json.dump(2) + "\n", out);
        if (*cfg.out != "-") out << "report: " << *cfg.out << '\n';
    }
    return exit_code(r.report.summary);
}

std::vector<std::vector<double>> figure_rows(const std::string& name) {
    std::vector<std::vector<double>> rows;
    if (name == "fig1") {
        const VarianceSolution s = solve_variance_gbm(-0.1, 0.15);
        for (int k = 0; k <= 1000; ++k) {
            const double x = k / 100.0;
            rows.push_back({x, s.j(x)});
        }
        return rows;
    }
    if (name == "fig2") {
        const MeanVarianceSolution s = solve_mean_variance_gbm(0.07, 0.45, 1.1);
        std::vector<double> xs;
        for (int k = 1; k <= 100; ++k) xs.push_back(k / 200.0);
        xs.push_back(*s.b);
        std::sort(xs.begin(), xs.end());
        for (double x : xs) rows.push_back({x, s.j(x), x});
        return rows;
    }
    throw ParameterError("unknown figure '" + name + "' (expected fig1 or fig2)");
}

int cmd_figure(const std::string& name, const GlobalOptions& g, std::ostream& out) {
    const auto rows = figure_rows(name);
    const std::vector<std::string> header = name == "fig2" ? std::vector<std::string>{"x", "J", "diag"}
                                                           : std::vector<std::string>{"x", "J"};
    write_text(g.out.value_or("-"), csv_of(header, rows), out);
    return kExitPass;
}

LimitsTable limits_table(const DiffusionModel& model, double x, std::vector<double> h_ladder, const MCSettings& mc) {
    if (!model.in_state(x)) throw DomainError("limits-check: x outside the state interval");
    if (h_ladder.empty()) throw ParameterError("limits-check needs at least one h");
    std::sort(h_ladder.begin(), h_ladder.end(), std::greater<>());
    for (double h : h_ladder)
        if (!(h > 0.0) || !model.in_state(x - h) || !model.in_state(x + h))
            throw DomainError("limits-check: every h must be positive with [x-h, x+h] inside the state interval");

    LimitsTable t;
    t.sigma2 = model.variance(x);
    for (double h : h_ladder) {
        PathConfig cfg = mc.path_config();
        cfg.dt = exit_step(model, x, h, mc.dt);
        const ExitStatistics s = exit_time_statistics(model, x, h, cfg, mc.paths);
        LimitsRow r;
        r.h = h;
        r.dt = cfg.dt;
        r.h2_over_tau = h * h / s.mean_time;
        r.h2_over_tau_se = r.h2_over_tau * s.mean_time_se / s.mean_time;
        r.tau2_over_tau = s.mean_time_sq / s.mean_time;
        // Delta method, ignoring the (positive) correlation of the two means: conservative.
        r.tau2_over_tau_se = r.tau2_over_tau * std::hypot(s.mean_time_sq_se / s.mean_time_sq, s.mean_time_se / s.mean_time);
        t.rows.push_back(r);
    }
    t.first_error = std::abs(t.rows.back().h2_over_tau - t.sigma2) / t.sigma2;
    for (std::size_t i = 1; i < t.rows.size(); ++i)
        if (!(t.rows[i].tau2_over_tau < t.rows[i - 1].tau2_over_tau)) t.decreasing = false;

    const KinkedFn k{[x](double y) { return std::abs(y - x); }, -1.0, 1.0};
    t.local_time = local_time_limit_check(model, k, x, h_ladder, mc.path_config(), mc.paths);
    return t;
}

int cmd_limits_check(const DiffusionModel& model, double x, const std::vector<double>& h_ladder, double tol,
                     const GlobalOptions& g, std::ostream& out) {
    const LimitsTable t = limits_table(model, x, h_ladder, g.settings());
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        const auto& lt = t.local_time.points[i];
        rows.push_back({r.h, r.h2_over_tau, r.h2_over_tau_se, r.tau2_over_tau, r.tau2_over_tau_se, lt.estimate,
                        lt.std_error, r.dt});
    }
    const std::string csv = csv_of({"h", "h2_over_tau", "h2_over_tau_se", "tau2_over_tau", "tau2_over_tau_se",
                                    "local_time", "local_time_se", "dt"},
                                   rows);
    write_text(g.out.value_or("-"), csv, out);
    const bool ok_first = t.first_error < tol;
    const bool ok_local = t.local_time.final_error() < tol;
    out << "# sigma^2(x) = " << format_double(t.sigma2) << '\n'
        << "# h^2/E[tau] relative error at smallest h: " << format_double(t.first_error) << (ok_first ? " ok" : " FAIL")
        << '\n'
        << "# E[tau^2]/E[tau] decreasing in h: " << (t.decreasing ? "ok" : "FAIL") << '\n'
        << "# local-time limit relative error: " << format_double(t.local_time.final_error())
        << (ok_local ? " ok" : " FAIL") << '\n';
    return ok_first && ok_local && t.decreasing ? kExitPass : kExitFail;
}

int cmd_simulate(const std::string& config_path, const std::vector<double>& xs, const GlobalOptions& g,
                 std::ostream& out) {
    RunConfig cfg = load_run_config(config_path);
    g.apply(cfg.mc);
    std::vector<double> points = xs;
    if (points.empty()) points = linspace(cfg.grid.lo, cfg.grid.hi, cfg.grid.n);
    std::vector<std::vector<double>> rows;
    bool warned = false;
    for (double x : points) {
        const ValueTriple v = estimate_values(cfg.problem, cfg.model, cfg.strategy, x, cfg.mc.path_config(), cfg.mc.paths);
        rows.push_back({x, v.phi.estimate, v.phi.std_error, v.psi.estimate, v.psi.std_error, v.j, v.j_se,
                        v.phi.censored_fraction});
        if (!v.phi.warning.empty() && !warned) {
            std::fprintf(stderr, "warning: %s\n", v.phi.warning.c_str());
            warned = true;
        }
    }
    const std::string csv =
        csv_of({"x", "phi", "phi_se", "psi", "psi_se", "J", "J_se", "censored_fraction"}, rows);
    write_text(g.out.value_or("-"), csv, out);
    return kExitPass;
}

}  // namespace tistop::cli
