#include "lagid/model_io.hpp"

#include <cmath>

#include "json.hpp"
#include "lagid/io.hpp"

namespace lagid {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void schema_error(const std::string& message)
{
    throw Error(ErrorKind::Schema, "model file: " + message);
}

ordered_json vector_json(const Eigen::VectorXd& v)
{
    return ordered_json(std::vector<double>(v.data(), v.data() + v.size()));
}

ordered_json pwl_json(const std::optional<Pwl>& f)
{
    if (!f)
        return nullptr;
    return {{"breakpoints", vector_json(f->breakpoints())}, {"values", vector_json(f->values())}};
}

const json& field(const json& node, const char* key, const std::string& where)
{
    const auto it = node.find(key);
    if (it == node.end())
        schema_error(where + " is missing '" + key + "'");
    return *it;
}

Eigen::VectorXd read_vector(const json& node, const char* key, const std::string& where)
{
    const json& v = field(node, key, where);
    if (!v.is_array())
        schema_error(where + "." + key + " must be an array of numbers");
    Eigen::VectorXd out(Eigen::Index(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number())
            schema_error(where + "." + key + " must be an array of numbers");
        out(Eigen::Index(i)) = v[i].get<double>();
    }
    return out;
}

int read_int(const json& node, const char* key, const std::string& where)
{
    const json& v = field(node, key, where);
    if (!v.is_number_integer())
        schema_error(where + "." + key + " must be an integer");
    return v.get<int>();
}

std::string read_string(const json& node, const char* key, const std::string& where)
{
    const json& v = field(node, key, where);
    if (!v.is_string())
        schema_error(where + "." + key + " must be a string");
    return v.get<std::string>();
}

std::optional<Pwl> read_pwl(const json& doc, const char* key)
{
    const auto it = doc.find(key);
    if (it == doc.end() || it->is_null())
        return std::nullopt;
    if (!it->is_object())
        schema_error(std::string(key) + " must be an object or null");
    try {
        return Pwl(read_vector(*it, "breakpoints", key), read_vector(*it, "values", key));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Schema)
            throw;
        schema_error(std::string(key) + ": " + e.what());
    }
}

LinearBlock read_linear(const json& doc)
{
    const json& node = field(doc, "linear", "model");
    if (!node.is_object())
        schema_error("linear must be an object");
    const std::string kind = read_string(node, "kind", "linear");
    try {
        if (kind == "laguerre") {
            const json& psi = field(node, "psi", "linear");
            if (!psi.is_number())
                schema_error("linear.psi must be a number");
            LaguerreNetwork<double> net(read_int(node, "p", "linear"), psi.get<double>());
            net.set_coefficients(read_vector(node, "c", "linear"));
            return net;
        }
        if (kind == "arx") {
            ArxModel arx;
            arx.na = read_int(node, "na", "linear");
            arx.nb = read_int(node, "nb", "linear");
            arx.delay = read_int(node, "delay", "linear");
            arx.a = read_vector(node, "a", "linear");
            arx.b = read_vector(node, "b", "linear");
            arx.validate();
            return arx;
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Schema)
            throw;
        schema_error(std::string("linear: ") + e.what());
    }
    schema_error("unknown linear kind '" + kind + "'");
}

} // namespace

std::string format_model(const ModelFile& file)
{
    const BlockModel& m = file.model;
    m.validate();

    ordered_json doc;
    doc["schema"] = 1;
    doc["structure"] = to_string(m.structure);
    doc["normalization"] = m.normalized ? "unit_dc_gain" : "none";
    ordered_json linear;
    if (const auto* net = std::get_if<LaguerreNetwork<double>>(&m.linear)) {
        linear["kind"] = "laguerre";
        linear["p"] = net->order();
        linear["psi"] = net->psi();
        linear["c"] = vector_json(net->coefficients());
    } else {
        const auto& arx = std::get<ArxModel>(m.linear);
        linear["kind"] = "arx";
        linear["na"] = arx.na;
        linear["nb"] = arx.nb;
        linear["delay"] = arx.delay;
        linear["a"] = vector_json(arx.a);
        linear["b"] = vector_json(arx.b);
    }
    doc["linear"] = std::move(linear);
    doc["input_nl"] = pwl_json(m.input_nl);
    doc["output_nl"] = pwl_json(m.output_nl);
    doc["warnings"] = m.warnings;
    doc["fit"] = {{"mse", std::isfinite(file.mse) ? ordered_json(file.mse) : ordered_json(nullptr)},
                  {"iterations", file.iterations},
                  {"converged", file.converged}};
    doc["config"] = file.config.empty() ? ordered_json(nullptr) : ordered_json::parse(file.config);
    return doc.dump(2) + "\n";
}

ModelFile parse_model(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, std::string("model file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object())
        schema_error("top level must be an object");
    if (read_int(doc, "schema", "model") != 1)
        schema_error("unsupported schema version");

    ModelFile file;
    BlockModel& m = file.model;
    try {
        m.structure = parse_structure(read_string(doc, "structure", "model"));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Schema)
            throw;
        schema_error(e.what());
    }
    const std::string normalization = read_string(doc, "normalization", "model");
    if (normalization != "unit_dc_gain" && normalization != "none")
        schema_error("unknown normalization tag '" + normalization + "'");
    m.normalized = normalization == "unit_dc_gain";
    m.linear = read_linear(doc);
    m.input_nl = read_pwl(doc, "input_nl");
    m.output_nl = read_pwl(doc, "output_nl");
    if (const auto it = doc.find("warnings"); it != doc.end()) {
        if (!it->is_array())
            schema_error("warnings must be an array of strings");
        for (const json& w : *it) {
            if (!w.is_string())
                schema_error("warnings must be an array of strings");
            m.warnings.push_back(w.get<std::string>());
        }
    }
    if (const auto it = doc.find("fit"); it != doc.end() && it->is_object()) {
        if (const auto mse = it->find("mse"); mse != it->end() && mse->is_number())
            file.mse = mse->get<double>();
        if (const auto iters = it->find("iterations"); iters != it->end() && iters->is_number_integer())
            file.iterations = iters->get<int>();
        if (const auto conv = it->find("converged"); conv != it->end() && conv->is_boolean())
            file.converged = conv->get<bool>();
    }
    if (const auto it = doc.find("config"); it != doc.end() && it->is_object())
        file.config = ordered_json::parse(text).at("config").dump();

    try {
        m.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::Mismatch, std::string("model file: ") + e.what());
    }
    return file;
}

void write_model(const ModelFile& file, const std::string& path)
{
    write_file_atomic(path, format_model(file));
}

ModelFile read_model(const std::string& path)
{
    return parse_model(read_file(path));
}

} // namespace lagid
