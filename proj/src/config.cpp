#include "lagid/config.hpp"

#include <concepts>
#include <limits>
#include <set>

#include "json.hpp"
#include "lagid/io.hpp"

namespace lagid {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& path, const std::string& message)
{
    throw Error(ErrorKind::Config, path + ": " + message);
}

// Walks one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Section {
public:
    Section(const json* node, std::string path)
        : node_(node)
        , path_(std::move(path))
    {
        if (node_ && !node_->is_object())
            config_error(label(), "expected an object");
    }

    Section child(const std::string& key)
    {
        const json* value = find(key);
        return Section(value, key_path(key));
    }

    void read(const std::string& key, double& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_number())
                config_error(key_path(key), "expected a number");
            out = v->get<double>();
        }
    }

    void read(const std::string& key, int& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_number_integer())
                config_error(key_path(key), "expected an integer");
            const auto wide = v->get<long long>();
            if (wide < std::numeric_limits<int>::min() || wide > std::numeric_limits<int>::max())
                config_error(key_path(key), "integer out of range");
            out = int(wide);
        }
    }

    template <std::unsigned_integral T>
    void read(const std::string& key, T& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned())
                config_error(key_path(key), "expected a non-negative integer");
            const auto wide = v->get<std::uint64_t>();
            if (wide > std::numeric_limits<T>::max())
                config_error(key_path(key), "integer out of range");
            out = T(wide);
        }
    }

    void read(const std::string& key, bool& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_boolean())
                config_error(key_path(key), "expected true or false");
            out = v->get<bool>();
        }
    }

    void read(const std::string& key, std::vector<double>& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_array())
                config_error(key_path(key), "expected an array of numbers");
            out.clear();
            for (const json& item : *v) {
                if (!item.is_number())
                    config_error(key_path(key), "expected an array of numbers");
                out.push_back(item.get<double>());
            }
        }
    }

    // Reads a tag and converts it with `parse`, reporting rejects under the key path.
    template <typename T, typename Parse>
    void read_tag(const std::string& key, T& out, Parse parse)
    {
        if (const json* v = find(key)) {
            if (!v->is_string())
                config_error(key_path(key), "expected a string");
            try {
                out = parse(v->get<std::string>());
            } catch (const Error& e) {
                config_error(key_path(key), e.what());
            }
        }
    }

    template <typename T, typename Parse>
    void read_tags(const std::string& key, std::vector<T>& out, Parse parse)
    {
        if (const json* v = find(key)) {
            if (!v->is_array())
                config_error(key_path(key), "expected an array of strings");
            out.clear();
            for (const json& item : *v) {
                if (!item.is_string())
                    config_error(key_path(key), "expected an array of strings");
                try {
                    out.push_back(parse(item.get<std::string>()));
                } catch (const Error& e) {
                    config_error(key_path(key), e.what());
                }
            }
        }
    }

    // Rejects keys that no read() asked for.
    void finish() const
    {
        if (!node_)
            return;
        for (const auto& [key, value] : node_->items())
            if (!seen_.count(key))
                config_error(key_path(key), "unknown key");
    }

private:
    const json* find(const std::string& key)
    {
        seen_.insert(key);
        if (!node_)
            return nullptr;
        const auto it = node_->find(key);
        return it == node_->end() ? nullptr : &*it;
    }

    [[nodiscard]] std::string key_path(const std::string& key) const
    {
        return path_.empty() ? key : path_ + "." + key;
    }

    [[nodiscard]] std::string label() const { return path_.empty() ? "config" : path_; }

    const json* node_;
    std::string path_;
    std::set<std::string> seen_;
};

void wrap_validation(const char* section, auto&& check)
{
    try {
        check();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config)
            throw;
        config_error(section, e.what());
    }
}

} // namespace

void RunConfig::validate() const
{
    if (experiment.samples < 1)
        config_error("experiment.samples", "must be at least 1");
    if (!(experiment.dt > 0.0))
        config_error("experiment.dt", "must be positive");
    if (!(experiment.sigma >= 0.0))
        config_error("experiment.sigma", "sigma must be non-negative");
    if (experiment.dwell < 1)
        config_error("experiment.dwell", "must be at least 1");
    wrap_validation("identification", [&] { ident.validate(); });
    if (sweep.sigmas.empty())
        config_error("sweep.sigmas", "needs at least one sigma");
    for (const double sigma : sweep.sigmas)
        if (!(sigma >= 0.0))
            config_error("sweep.sigmas", "sigma must be non-negative");
    if (sweep.families.empty())
        config_error("sweep.families", "needs at least one model family");
    if (sweep.repeats < 1)
        config_error("sweep.repeats", "must be at least 1");
    if (!(sweep.dispersion_max_sigma >= 0.0))
        config_error("sweep.dispersion_max_sigma", "must be non-negative");
}

RunConfig parse_config(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
    }

    RunConfig cfg;
    Section root(&doc, "");
    root.read("seed", cfg.seed);

    Section plant = root.child("plant");
    plant.read("seed", cfg.plant_seed);
    plant.finish();

    Section exp = root.child("experiment");
    exp.read("samples", cfg.experiment.samples);
    exp.read("dt", cfg.experiment.dt);
    exp.read("sigma", cfg.experiment.sigma);
    exp.read_tag("excitation", cfg.experiment.excitation, parse_excitation);
    exp.read("dwell", cfg.experiment.dwell);
    exp.finish();

    IdentConfig& id = cfg.ident;
    Section ident = root.child("identification");
    ident.read_tag("structure", id.structure, parse_structure);
    ident.read_tag("linear_kind", id.linear_kind, parse_linear_kind);
    Section laguerre = ident.child("laguerre");
    laguerre.read("order", id.laguerre_order);
    laguerre.read("psi_grid", id.psi_grid);
    laguerre.finish();
    Section arx = ident.child("arx");
    arx.read("na", id.arx_na);
    arx.read("nb", id.arx_nb);
    arx.read("delay", id.arx_delay);
    arx.finish();
    Section pwl = ident.child("nonlinearity");
    pwl.read("input_nodes", id.input_nodes);
    pwl.read("output_nodes", id.output_nodes);
    pwl.read("grid_margin", id.grid_margin);
    pwl.read("grid_trim", id.grid_trim);
    pwl.read("freeze_input", id.freeze_input_nl);
    pwl.read("freeze_output", id.freeze_output_nl);
    pwl.finish();
    Section rls = ident.child("rls");
    rls.read("lambda", id.rls.lambda);
    rls.read("delta", id.rls.delta);
    rls.read("checkpoint_stride", id.rls.checkpoint_stride);
    rls.finish();
    ident.read("tol", id.tol);
    ident.read("max_iters", id.max_iters);
    ident.read("refine_iters", id.refine_iters);
    ident.read("min_samples", id.min_samples);
    ident.read("parallel", id.parallel);
    ident.finish();

    Section sweep = root.child("sweep");
    sweep.read("sigmas", cfg.sweep.sigmas);
    sweep.read_tags("families", cfg.sweep.families, parse_family);
    sweep.read("repeats", cfg.sweep.repeats);
    sweep.read("dispersion_max_sigma", cfg.sweep.dispersion_max_sigma);
    sweep.read("parallel", cfg.sweep.parallel);
    sweep.finish();

    root.finish();
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    return parse_config(read_file(path));
}

std::string config_json(const RunConfig& cfg)
{
    const IdentConfig& id = cfg.ident;
    ordered_json doc;
    doc["seed"] = cfg.seed;
    doc["plant"] = {{"seed", cfg.plant_seed}};
    doc["experiment"] = {{"samples", cfg.experiment.samples},
                         {"dt", cfg.experiment.dt},
                         {"sigma", cfg.experiment.sigma},
                         {"excitation", to_string(cfg.experiment.excitation)},
                         {"dwell", cfg.experiment.dwell}};
    ordered_json ident;
    ident["structure"] = to_string(id.structure);
    ident["linear_kind"] = to_string(id.linear_kind);
    ident["laguerre"] = {{"order", id.laguerre_order}, {"psi_grid", id.psi_grid}};
    ident["arx"] = {{"na", id.arx_na}, {"nb", id.arx_nb}, {"delay", id.arx_delay}};
    ident["nonlinearity"] = {{"input_nodes", id.input_nodes},     {"output_nodes", id.output_nodes},
                             {"grid_margin", id.grid_margin},     {"grid_trim", id.grid_trim},
                             {"freeze_input", id.freeze_input_nl}, {"freeze_output", id.freeze_output_nl}};
    ident["rls"] = {{"lambda", id.rls.lambda},
                    {"delta", id.rls.delta},
                    {"checkpoint_stride", id.rls.checkpoint_stride}};
    ident["tol"] = id.tol;
    ident["max_iters"] = id.max_iters;
    ident["refine_iters"] = id.refine_iters;
    ident["min_samples"] = id.min_samples;
    ident["parallel"] = id.parallel;
    doc["identification"] = std::move(ident);

    ordered_json families = ordered_json::array();
    for (const Family f : cfg.sweep.families)
        families.push_back(to_string(f));
    doc["sweep"] = {{"sigmas", cfg.sweep.sigmas},
                    {"families", std::move(families)},
                    {"repeats", cfg.sweep.repeats},
                    {"dispersion_max_sigma", cfg.sweep.dispersion_max_sigma},
                    {"parallel", cfg.sweep.parallel}};
    return doc.dump();
}

SweepConfig effective_sweep(const RunConfig& cfg)
{
    SweepConfig sweep = cfg.sweep;
    sweep.ident = cfg.ident;
    sweep.samples = cfg.experiment.samples;
    sweep.excitation = cfg.experiment.excitation;
    sweep.dwell = cfg.experiment.dwell;
    sweep.seed = cfg.seed;
    return sweep;
}

} // namespace lagid
