#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "tistop/error.hpp"

using namespace tistop;
using namespace tistop::cli;

namespace {

template <class T>
void optional_flag(CLI::App& app, const std::string& name, std::optional<T>& target, const std::string& help) {
    app.add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equilibrium stopping rules for time-inconsistent problems"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    optional_flag(app, "--seed", g.seed, "Master seed for Monte Carlo streams");
    optional_flag(app, "--threads", g.threads, "Worker threads (0 = all hardware threads)");
    optional_flag(app, "--paths", g.paths, "Monte Carlo paths per estimate");
    optional_flag(app, "--dt", g.dt, "Simulation time step");
    optional_flag(app, "--horizon", g.horizon, "Censoring horizon");
    optional_flag(app, "--out", g.out, "Output file ('-' for stdout)");

    GridSpec grid{0.0, 10.0, 101};
    auto add_grid = [&](CLI::App* sub) {
        sub->add_option("--lo", grid.lo, "Lower end of the CSV grid")->capture_default_str();
        sub->add_option("--hi", grid.hi, "Upper end of the CSV grid")->capture_default_str();
        sub->add_option("--n", grid.n, "Number of CSV grid points")->capture_default_str()->check(CLI::Range(1, 1000000));
    };

    double mu = 0.0, sigma2 = 0.0, gamma = 0.0;
    auto* sv = app.add_subcommand("solve-variance", "Constant-intensity equilibrium of the variance problem under GBM");
    sv->add_option("--mu", mu, "GBM drift")->required();
    sv->add_option("--sigma2", sigma2, "GBM variance rate")->required();
    add_grid(sv);

    auto* smv = app.add_subcommand("solve-meanvariance", "Regime and threshold of the mean-variance problem under GBM");
    smv->add_option("--mu", mu, "GBM drift")->required();
    smv->add_option("--sigma2", sigma2, "GBM variance rate")->required();
    smv->add_option("--gamma", gamma, "Risk aversion")->required();
    add_grid(smv);

    std::string config_path;
    auto* ver = app.add_subcommand("verify", "Check a strategy against the equilibrium conditions");
    ver->add_option("config", config_path, "JSON configuration (schema 1)")->required()->check(CLI::ExistingFile);

    std::string figure;
    auto* fig = app.add_subcommand("figure", "Write figure data as CSV");
    fig->add_option("name", figure, "fig1 or fig2")->required()->check(CLI::IsMember({"fig1", "fig2"}));

    std::string model_name = "wiener";
    double x = 0.0, tol = 0.05;
    std::vector<double> ladder{0.04, 0.02, 0.01};
    auto* lim = app.add_subcommand("limits-check", "Small-ball exit-time limits at a point");
    lim->add_option("--model", model_name, "gbm or wiener")->check(CLI::IsMember({"gbm", "wiener"}))->capture_default_str();
    lim->add_option("--mu", mu, "GBM drift");
    lim->add_option("--sigma2", sigma2, "GBM variance rate");
    lim->add_option("--x", x, "Centre point")->capture_default_str();
    lim->add_option("--h-ladder", ladder, "Ball half-widths h")->capture_default_str();
    lim->add_option("--tol", tol, "Relative tolerance for the limit checks")->capture_default_str();

    std::vector<double> points;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo phi, psi and J for a configured strategy");
    sim->add_option("config", config_path, "JSON configuration (schema 1)")->required()->check(CLI::ExistingFile);
    sim->add_option("--x", points, "Starting points (default: the config grid)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInput;
    }

    try {
        if (*sv) return cmd_solve_variance(mu, sigma2, grid, g, std::cout);
        if (*smv) return cmd_solve_meanvariance(mu, sigma2, gamma, grid, g, std::cout);
        if (*ver) return cmd_verify(config_path, g, std::cout);
        if (*fig) return cmd_figure(figure, g, std::cout);
        if (*lim) {
            if (model_name == "gbm" && (lim->count("--mu") == 0 || lim->count("--sigma2") == 0))
                throw ParameterError("--model gbm needs --mu and --sigma2");
            const DiffusionModel model =
                model_name == "gbm" ? DiffusionModel::gbm(mu, sigma2) : DiffusionModel::wiener();
            return cmd_limits_check(model, x, ladder, tol, g, std::cout);
        }
        if (*sim) return cmd_simulate(config_path, points, g, std::cout);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitInput;
    } catch (const ParameterError& e) {
        std::fprintf(stderr, "parameter error: %s\n", e.what());
        return kExitInput;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "domain error: %s\n", e.what());
        return kExitInput;
    } catch (const MissingDerivativeError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const Error& e) {
        std::fprintf(stderr, "could not decide: %s\n", e.what());
        return kExitInconclusive;
    }
    return kExitInput;
}
