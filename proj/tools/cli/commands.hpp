#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"
#include "tistop/equilibrium.hpp"

namespace tistop::cli {

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitInput = 2, kExitInconclusive = 3 };

int exit_code(Verdict v) noexcept;

/// Flags accepted by every subcommand; unset ones leave config values alone.
struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::size_t> paths;
    std::optional<double> dt;
    std::optional<double> horizon;
    std::optional<std::string> out;

    void apply(MCSettings& mc) const;
    [[nodiscard]] MCSettings settings() const;
};

/// "%.17g" formatting, independent of the global locale.
std::string format_double(double v);

/// Write rows as CSV with an LF-terminated header line.
void write_csv(std::ostream& os, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

/// Write to `path`, or to `fallback` when path is "-".
void write_text(const std::string& path, const std::string& content, std::ostream& fallback);

int cmd_solve_variance(double mu, double sigma2, const GridSpec& grid, const GlobalOptions& g, std::ostream& out);

int cmd_solve_meanvariance(double mu, double sigma2, double gamma, const GridSpec& grid, const GlobalOptions& g,
                           std::ostream& out);

struct VerifyResult {
    EquilibriumReport report;
    nlohmann::json json;
    ValueMode mode = ValueMode::ClosedForm;
};

/// Value functions for the run: closed form when requested or available,
/// otherwise Monte Carlo on the report grid.
ValueFunctions resolve_values(const RunConfig& cfg, ValueMode* mode = nullptr);

VerifyResult run_verify(const RunConfig& cfg);

nlohmann::json report_to_json(const RunConfig& cfg, const EquilibriumReport& report, double runtime_seconds);

/// Human-readable verdict table.
void print_report(std::ostream& os, const EquilibriumReport& report);

int cmd_verify(const std::string& config_path, const GlobalOptions& g, std::ostream& out);

/// Rows (x, J) for fig1, or (x, J, diag) for fig2.
std::vector<std::vector<double>> figure_rows(const std::string& name);

int cmd_figure(const std::string& name, const GlobalOptions& g, std::ostream& out);

struct LimitsRow {
    double h = 0.0;
    double h2_over_tau = 0.0;
    double h2_over_tau_se = 0.0;
    double tau2_over_tau = 0.0;
    double tau2_over_tau_se = 0.0;
    double dt = 0.0;
};

struct LimitsTable {
    double sigma2 = 0.0;  // sigma^2(x)
    std::vector<LimitsRow> rows;
    LocalTimeReport local_time;
    double first_error = 0.0;  // relative error of h^2/E tau at the smallest h
    bool decreasing = true;    // E tau^2 / E tau decreasing in h
};

LimitsTable limits_table(const DiffusionModel& model, double x, std::vector<double> h_ladder, const MCSettings& mc);

int cmd_limits_check(const DiffusionModel& model, double x, const std::vector<double>& h_ladder, double tol,
                     const GlobalOptions& g, std::ostream& out);

/// Monte Carlo phi, psi, J at each point of `xs` (the config grid when empty).
int cmd_simulate(const std::string& config_path, const std::vector<double>& xs, const GlobalOptions& g,
                 std::ostream& out);

}  // namespace tistop::cli
