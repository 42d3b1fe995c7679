#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lagid/evaluate.hpp"
#include "lagid/models.hpp"
#include "lagid/plantlab.hpp"

namespace lagid {

[[nodiscard]] std::vector<double> table_sigmas(); // 0.01, 0.05, 0.1, 0.25, 0.5, 1, 5

struct SweepConfig {
    std::vector<double> sigmas{table_sigmas()};
    std::vector<Family> families{all_families()};
    IdentConfig ident{}; // structure and linear kind are overridden per family
    std::size_t samples{2000};
    ExcitationKind excitation{ExcitationKind::PrbsSteps};
    int dwell{50};
    std::uint64_t seed{1};
    int repeats{1};
    double dispersion_max_sigma{1.0};
    bool parallel{true};
};

[[nodiscard]] IdentConfig family_config(Family family, const IdentConfig& base);

// Identification and validation records of one sweep cell; a pure function
// of (plant, seed, repeat, sigma), shared by every family.
struct CellData {
    Dataset identification;
    std::vector<double> validation_input;
    Eigen::VectorXd validation_truth;
};

[[nodiscard]] CellData cell_data(const ReferencePlant& plant, const SweepConfig& cfg, double sigma, int repeat);

[[nodiscard]] SweepCell run_cell(const ReferencePlant& plant, const SweepConfig& cfg, Family family, double sigma);

[[nodiscard]] SweepReport robustness_sweep(const ReferencePlant& plant, const SweepConfig& cfg);

enum class ReportFormat { Csv, Structured };

[[nodiscard]] std::string format_report(const SweepReport& report, ReportFormat format,
                                        bool include_timings = true);
void write_report(const SweepReport& report, const std::string& path, ReportFormat format,
                  bool include_timings = true);

} // namespace lagid
