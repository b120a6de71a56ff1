#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

#include "tistop/diffusion.hpp"
#include "tistop/equilibrium.hpp"
#include "tistop/payoff.hpp"
#include "tistop/strategy.hpp"
#include "tistop/value_functions.hpp"

namespace tistop::cli {

enum class ValuesMode { Auto, ClosedForm, MonteCarlo };

/// Monte Carlo settings shared by every subcommand.
struct MCSettings {
    std::size_t paths = 20000;
    double dt = 1e-3;
    double horizon = 200.0;
    std::uint64_t seed = 20190611;
    unsigned threads = 0;
    bool antithetic = false;
    std::size_t evidence_paths = 20000;

    [[nodiscard]] PathConfig path_config() const;
};

/// Fully resolved verification run.
struct RunConfig {
    nlohmann::json document;  // the input after defaults are filled in
    DiffusionModel model = DiffusionModel::wiener();
    Problem problem;
    MixedStrategy strategy;
    GridSpec grid;
    ValuesMode values = ValuesMode::Auto;
    MCSettings mc;
    std::optional<std::string> out;
};

/// Validate and resolve a schema-1 document. Throws ConfigError on unknown keys,
/// missing fields or wrong types, and ParameterError/DomainError from the library
/// when a named built-in cannot be constructed for the given parameters.
RunConfig parse_run_config(const nlohmann::json& doc);

RunConfig load_run_config(const std::string& path);

/// The document that reproduces `cfg`, including the MC settings in effect.
nlohmann::json resolved_document(const RunConfig& cfg);

std::string to_string(ValuesMode mode);

}  // namespace tistop::cli
