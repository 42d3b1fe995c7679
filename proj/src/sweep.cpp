#include "lagid/sweep.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "lagid/io.hpp"
#include "lagid/parallel.hpp"

namespace lagid {

namespace {

enum Stream : std::uint64_t { IdentInput = 1, Noise = 2, ValidationInput = 3 };

std::string reason_for(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Sensitivity: return "sensitivity";
    case ErrorKind::Singularity:
    case ErrorKind::Normalization: return "singularity";
    default: return "divergence";
    }
}

std::string short_number(double value)
{
    char text[32];
    std::snprintf(text, sizeof text, "%.6g", value);
    return text;
}

} // namespace

std::vector<double> table_sigmas()
{
    return {0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 5.0};
}

IdentConfig family_config(Family family, const IdentConfig& base)
{
    IdentConfig cfg = base;
    switch (family) {
    case Family::Hammerstein:
        cfg.structure = Structure::Hammerstein;
        cfg.linear_kind = LinearKind::Laguerre;
        break;
    case Family::Wiener:
        cfg.structure = Structure::Wiener;
        cfg.linear_kind = LinearKind::Laguerre;
        break;
    case Family::HwLaguerre:
        cfg.structure = Structure::HammersteinWiener;
        cfg.linear_kind = LinearKind::Laguerre;
        break;
    case Family::HwArx:
        cfg.structure = Structure::HammersteinWiener;
        cfg.linear_kind = LinearKind::Arx;
        break;
    }
    return cfg;
}

CellData cell_data(const ReferencePlant& plant, const SweepConfig& cfg, double sigma, int repeat)
{
    const std::uint64_t base = derive_seed(cfg.seed, std::uint64_t(repeat));
    CellData data;
    const auto u = generate_excitation(cfg.excitation, cfg.samples, plant.input_min, plant.input_max,
                                       derive_seed(base, IdentInput), cfg.dwell);
    data.identification = run_experiment(plant, u, sigma, derive_seed(base, Noise));
    data.validation_input = generate_excitation(cfg.excitation, cfg.samples, plant.input_min, plant.input_max,
                                                derive_seed(base, ValidationInput), cfg.dwell);
    data.validation_truth = simulate(plant.truth, data.validation_input);
    return data;
}

SweepCell run_cell(const ReferencePlant& plant, const SweepConfig& cfg, Family family, double sigma)
{
    SweepCell cell;
    cell.family = family;
    cell.sigma = sigma;
    IdentConfig ident = family_config(family, cfg.ident);
    ident.parallel = false;

    const auto started = std::chrono::steady_clock::now();
    double mse_sum = 0.0;
    double ident_sum = 0.0;
    for (int r = 0; r < cfg.repeats && cell.stable; ++r) {
        const CellData data = cell_data(plant, cfg, sigma, r);
        try {
            const IdentResult result = identify(data.identification, ident);
            const Eigen::VectorXd prediction = simulate(result.model, data.validation_input);
            const Eigen::VectorXd residual = data.validation_truth - prediction;
            const StabilityVerdict verdict = detect_divergence(
                {residual.data(), std::size_t(residual.size())}, std::max(result.mse, sigma * sigma));
            cell.iterations += result.iterations;
            if (!verdict.stable || !std::isfinite(result.mse)) {
                cell.stable = false;
                cell.reason = "divergence";
                cell.detail = to_string(verdict.reason);
                break;
            }
            mse_sum += residual.squaredNorm() / double(residual.size());
            ident_sum += result.mse;
        } catch (const Error& e) {
            cell.stable = false;
            cell.reason = reason_for(e.kind());
            cell.detail = e.what();
            if (e.kind() == ErrorKind::Sensitivity && e.location())
                cell.iterations += int(*e.location());
        }
    }
    if (cell.stable) {
        cell.mse = mse_sum / double(cfg.repeats);
        cell.mse_ident = ident_sum / double(cfg.repeats);
    }
    cell.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return cell;
}

SweepReport robustness_sweep(const ReferencePlant& plant, const SweepConfig& cfg)
{
    if (cfg.sigmas.empty())
        throw Error(ErrorKind::Argument, "sweep needs at least one sigma");
    if (cfg.families.empty())
        throw Error(ErrorKind::Argument, "sweep needs at least one model family");
    if (cfg.repeats < 1)
        throw Error(ErrorKind::Argument, "sweep repeats must be at least 1");
    for (const double sigma : cfg.sigmas)
        if (!(sigma >= 0.0))
            throw Error(ErrorKind::Argument, "sweep sigma must be non-negative");

    SweepReport report;
    report.sigmas = cfg.sigmas;
    report.families = cfg.families;
    report.dispersion_max_sigma = cfg.dispersion_max_sigma;
    report.cells.resize(cfg.sigmas.size() * cfg.families.size());

    const std::size_t width = cfg.families.size();
    parallel_for(
        report.cells.size(),
        [&](std::size_t i) {
            report.cells[i] = run_cell(plant, cfg, cfg.families[i % width], cfg.sigmas[i / width]);
        },
        cfg.parallel ? std::thread::hardware_concurrency() : 1u);
    return report;
}

std::string format_report(const SweepReport& report, ReportFormat format, bool include_timings)
{
    const std::size_t width = report.families.size();
    if (report.cells.size() != report.sigmas.size() * width)
        throw Error(ErrorKind::Argument, "sweep report is not a complete grid");

    if (format == ReportFormat::Csv) {
        std::string out = "# schema=1\n";
        if (!report.config_json.empty())
            out += "# config=" + report.config_json + "\n";
        out += "# cell=validation MSE against the noiseless plant output\n";
        out += "sigma";
        for (const Family f : report.families)
            out += std::string(",") + to_string(f);
        out += "\n";
        for (std::size_t s = 0; s < report.sigmas.size(); ++s) {
            out += short_number(report.sigmas[s]);
            for (std::size_t f = 0; f < width; ++f) {
                const SweepCell& c = report.cells[s * width + f];
                out += "," + (c.stable ? short_number(c.mse) : "UNSTABLE(" + c.reason + ")");
            }
            out += "\n";
        }
        out += "# dispersion(sigma<=" + short_number(report.dispersion_max_sigma) + ")";
        for (const Family f : report.families) {
            const auto d = report.dispersion_of(f);
            out += "," + (d ? short_number(*d) : std::string("NA"));
        }
        out += "\n";
        return out;
    }

    nlohmann::ordered_json doc;
    doc["schema"] = 1;
    if (!report.config_json.empty())
        doc["config"] = nlohmann::ordered_json::parse(report.config_json);
    doc["sigmas"] = report.sigmas;
    auto& families = doc["families"] = nlohmann::ordered_json::array();
    for (const Family f : report.families)
        families.push_back(to_string(f));
    auto& cells = doc["cells"] = nlohmann::ordered_json::array();
    for (const SweepCell& c : report.cells) {
        nlohmann::ordered_json cell;
        cell["family"] = to_string(c.family);
        cell["sigma"] = c.sigma;
        cell["stable"] = c.stable;
        if (c.stable) {
            cell["mse"] = c.mse;
            cell["mse_ident"] = c.mse_ident;
        } else {
            cell["mse"] = nullptr;
            cell["mse_ident"] = nullptr;
            cell["reason"] = c.reason;
            cell["detail"] = c.detail;
        }
        cell["iterations"] = c.iterations;
        if (include_timings)
            cell["wall_time_s"] = c.wall_time_s;
        cells.push_back(std::move(cell));
    }
    auto& summary = doc["dispersion"] = nlohmann::ordered_json::object();
    summary["max_sigma"] = report.dispersion_max_sigma;
    for (const Family f : report.families) {
        const auto d = report.dispersion_of(f);
        const auto m = report.mean_of(f);
        summary[to_string(f)] = {{"std", d ? nlohmann::ordered_json(*d) : nlohmann::ordered_json(nullptr)},
                                 {"mean", m ? nlohmann::ordered_json(*m) : nlohmann::ordered_json(nullptr)}};
    }
    return doc.dump(2) + "\n";
}

void write_report(const SweepReport& report, const std::string& path, ReportFormat format, bool include_timings)
{
    write_file_atomic(path, format_report(report, format, include_timings));
}

} // namespace lagid
