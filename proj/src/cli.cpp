#include "lagid/cli.hpp"

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lagid/config.hpp"
#include "lagid/evaluate.hpp"
#include "lagid/io.hpp"
#include "lagid/model_io.hpp"
#include "lagid/plantlab.hpp"
#include "lagid/sweep.hpp"

namespace lagid {

int exit_code(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Argument:
    case ErrorKind::Stability: return kExitConfig;
    case ErrorKind::Io: return kExitIo;
    case ErrorKind::Parse:
    case ErrorKind::Schema: return kExitSchema;
    case ErrorKind::Singularity:
    case ErrorKind::Normalization: return kExitSingularity;
    case ErrorKind::Sensitivity: return kExitSensitivity;
    case ErrorKind::Divergence:
    case ErrorKind::NumericalBreakdown: return kExitDivergence;
    case ErrorKind::Mismatch: return kExitMismatch;
    }
    return kExitInternal;
}

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string data;
    std::string model;
    std::string residuals;
    std::string report_json;
    bool timings{false};
};

RunConfig effective_config(const Options& opt)
{
    RunConfig cfg = opt.config.empty() ? parse_config("{}") : load_config(opt.config);
    if (opt.seed)
        cfg.seed = *opt.seed;
    return cfg;
}

void require(const std::string& value, const char* flag)
{
    if (value.empty())
        throw Error(ErrorKind::Config, std::string(flag) + " is required");
}

std::string sibling_path(const std::string& path, const std::string& extension)
{
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
        return path.substr(0, dot) + extension;
    return path + extension;
}

int cmd_generate(const Options& opt, std::ostream& out)
{
    require(opt.out, "--out");
    const RunConfig cfg = effective_config(opt);
    const ReferencePlant plant = make_reference_plant(cfg.plant_seed);
    SweepConfig sweep = effective_sweep(cfg);
    sweep.samples = cfg.experiment.samples;

    // Same records as the first repeat of a sweep cell at this sigma.
    Dataset data = cell_data(plant, sweep, cfg.experiment.sigma, 0).identification;
    data.dt = cfg.experiment.dt;
    data.meta.seed = cfg.seed;
    data.meta.extra.emplace_back("config", config_json(cfg));
    write_dataset(data, opt.out);
    out << "generated N=" << data.size() << " sigma=" << format_double(cfg.experiment.sigma)
        << " seed=" << cfg.seed << " -> " << opt.out << "\n";
    return kExitOk;
}

int cmd_identify(const Options& opt, std::ostream& out, std::ostream& err)
{
    require(opt.data, "--data");
    require(opt.out, "--out");
    const RunConfig cfg = effective_config(opt);
    const Dataset data = read_dataset(opt.data);
    const IdentResult result = identify(data, cfg.ident);

    ModelFile file;
    file.model = result.model;
    file.mse = result.mse;
    file.iterations = result.iterations;
    file.converged = result.converged;
    file.config = config_json(cfg);
    write_model(file, opt.out);

    if (!result.converged)
        err << "warning: identification did not converge within " << cfg.ident.max_iters
            << " iterations; best iterate kept\n";
    out << "structure=" << to_string(result.model.structure) << " linear=" << to_string(kind_of(result.model.linear))
        << "\n";
    out << "mse=" << format_double(result.mse) << " iterations=" << result.iterations << "\n";
    return kExitOk;
}

std::string timings_json(const SweepReport& report)
{
    nlohmann::ordered_json doc;
    doc["schema"] = 1;
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const SweepCell& cell : report.cells)
        cells.push_back({{"family", to_string(cell.family)}, {"sigma", cell.sigma}, {"wall_time_s", cell.wall_time_s}});
    doc["cells"] = std::move(cells);
    return doc.dump(2) + "\n";
}

int cmd_sweep(const Options& opt, std::ostream& out)
{
    require(opt.out, "--out");
    const RunConfig cfg = effective_config(opt);
    const ReferencePlant plant = make_reference_plant(cfg.plant_seed);
    SweepReport report = robustness_sweep(plant, effective_sweep(cfg));
    report.config_json = config_json(cfg);

    const std::string csv = format_report(report, ReportFormat::Csv, false);
    std::string json_path = opt.report_json.empty() ? sibling_path(opt.out, ".json") : opt.report_json;
    if (json_path == opt.out)
        json_path += ".json";
    write_file_atomic(opt.out, csv);
    write_report(report, json_path, ReportFormat::Structured, false);
    if (opt.timings)
        write_file_atomic(sibling_path(opt.out, ".timings.json"), timings_json(report));
    out << csv;
    return kExitOk;
}

std::string format_residuals(const Dataset& data, const Eigen::VectorXd& yhat, const ModelFile& file)
{
    std::string text = "# schema=1\n";
    text += "# structure=" + std::string(to_string(file.model.structure)) + "\n";
    if (!file.config.empty())
        text += "# config=" + file.config + "\n";
    text += "k,y,yhat,residual\n";
    for (std::size_t k = 0; k < data.size(); ++k) {
        const double prediction = yhat(Eigen::Index(k));
        text += std::to_string(k) + "," + format_double(data.y[k]) + "," + format_double(prediction) + ","
                + format_double(data.y[k] - prediction) + "\n";
    }
    return text;
}

int cmd_validate(const Options& opt, std::ostream& out)
{
    require(opt.model, "--model");
    require(opt.data, "--data");
    const ModelFile file = read_model(opt.model);
    const Dataset data = read_dataset(opt.data);
    const Eigen::VectorXd yhat = simulate(file.model, data.u);
    for (Eigen::Index k = 0; k < yhat.size(); ++k)
        if (!std::isfinite(yhat(k)))
            throw Error(ErrorKind::Divergence, "model output is not finite at sample " + std::to_string(k));
    const double error = mse(data.output(), std::span<const double>(yhat.data(), std::size_t(yhat.size())));
    if (!opt.residuals.empty())
        write_file_atomic(opt.residuals, format_residuals(data, yhat, file));
    out << "mse=" << format_double(error) << " samples=" << data.size() << "\n";
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Block-oriented nonlinear system identification with Laguerre networks", "lagid"};
    app.require_subcommand(1);
    Options opt;

    const auto common = [&](CLI::App* cmd, bool needs_out) {
        cmd->add_option("--config", opt.config, "JSON configuration file (defaults when omitted)");
        cmd->add_option("--seed", opt.seed, "Override the run seed");
        if (needs_out)
            cmd->add_option("--out", opt.out, "Output path")->required();
    };

    CLI::App* generate = app.add_subcommand("generate", "Simulate the reference plant and write a dataset CSV");
    common(generate, true);

    CLI::App* ident = app.add_subcommand("identify", "Identify a model from a dataset and write a model file");
    common(ident, true);
    ident->add_option("--data", opt.data, "Dataset CSV")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "Run the noise robustness sweep and write the report");
    common(sweep, true);
    sweep->add_option("--json", opt.report_json, "Structured report path (default: --out with .json)");
    sweep->add_flag("--timings", opt.timings, "Also write per-cell wall times to <out>.timings.json");

    CLI::App* validate = app.add_subcommand("validate", "Simulate a model on a dataset and report the MSE");
    common(validate, false);
    validate->add_option("--model", opt.model, "Model file")->required();
    validate->add_option("--data", opt.data, "Dataset CSV")->required();
    validate->add_option("--residuals", opt.residuals, "Write per-sample residuals (k,y,yhat,residual)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (generate->parsed())
            return cmd_generate(opt, out);
        if (ident->parsed())
            return cmd_identify(opt, out, err);
        if (sweep->parsed())
            return cmd_sweep(opt, out);
        if (validate->parsed()) {
            // Validation needs no config, but a given one must still be well formed.
            if (!opt.config.empty())
                (void)load_config(opt.config);
            return cmd_validate(opt, out);
        }
    } catch (const Error& e) {
        err << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}

} // namespace lagid
