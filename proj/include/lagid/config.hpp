#pragma once

#include <cstdint>
#include <string>

#include "lagid/models.hpp"
#include "lagid/plantlab.hpp"
#include "lagid/sweep.hpp"

namespace lagid {

// Settings for a single generated record.
struct ExperimentConfig {
    std::size_t samples{2000};
    double dt{1.0};
    double sigma{0.01};
    ExcitationKind excitation{ExcitationKind::PrbsSteps};
    int dwell{50};
};

// Everything the command-line tools read from a config file. Every field has
// a default, so an empty object `{}` is a complete configuration.
struct RunConfig {
    std::uint64_t seed{1};
    std::uint64_t plant_seed{42};
    ExperimentConfig experiment{};
    IdentConfig ident{};
    // Only the sweep-specific fields are read from here; samples, excitation,
    // dwell, seed and ident come from the sections above.
    SweepConfig sweep{};

    // Throws Config errors naming the offending key.
    void validate() const;
};

// Parses a JSON config. Keys absent from the document keep their defaults;
// unknown keys and mistyped values are Config errors carrying the key path.
[[nodiscard]] RunConfig parse_config(const std::string& text);
[[nodiscard]] RunConfig load_config(const std::string& path);

// Compact JSON of the effective configuration, with every field spelled out.
// parse_config(config_json(c)) reproduces c.
[[nodiscard]] std::string config_json(const RunConfig& config);

// Sweep settings with the shared fields filled in from the rest of the config.
[[nodiscard]] SweepConfig effective_sweep(const RunConfig& config);

} // namespace lagid
