#pragma once

#include <limits>
#include <string>

#include "lagid/models.hpp"

namespace lagid {

// Identified model plus the fit summary written next to it.
struct ModelFile {
    BlockModel model;
    double mse{std::numeric_limits<double>::quiet_NaN()};
    int iterations{0};
    bool converged{true};
    std::string config; // effective configuration JSON, empty when unknown
};

// JSON document, schema version 1. Doubles are written with round-trip precision.
[[nodiscard]] std::string format_model(const ModelFile& file);

// Parse errors for malformed JSON, Schema errors for missing or mistyped
// fields, Mismatch errors when the structure tag disagrees with the blocks present.
[[nodiscard]] ModelFile parse_model(const std::string& text);

void write_model(const ModelFile& file, const std::string& path);
[[nodiscard]] ModelFile read_model(const std::string& path);

} // namespace lagid
