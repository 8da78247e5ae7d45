#include "dps/checkpoint.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dps/errors.hpp"

namespace dps {

namespace {

using nlohmann::json;

void append_array(std::string& out, std::span<const double> values) {
    out += '[';
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += format_real(values[i]);
    }
    out += ']';
}

const json& field(const json& object, const char* key, const std::string& where) {
    auto it = object.find(key);
    if (it == object.end()) {
        throw CheckpointFormatError(where + ": missing field \"" + key + "\"");
    }
    return *it;
}

// JSON has no NaN/Inf literals, so non-finite values arrive as null or as
// out-of-range numbers (1e999 parses to inf).
Vector real_array(const json& value, const std::string& where) {
    if (!value.is_array()) throw CheckpointFormatError(where + " must be an array");
    Vector out;
    out.reserve(value.size());
    for (const json& item : value) {
        if (item.is_null()) throw NonFiniteError(where + " contains a non-finite value");
        if (!item.is_number()) throw CheckpointFormatError(where + " must contain only numbers");
        const double v = item.get<double>();
        if (!std::isfinite(v)) throw NonFiniteError(where + " contains a non-finite value");
        out.push_back(v);
    }
    return out;
}

double real_value(const json& value, const std::string& where) {
    if (value.is_null()) throw NonFiniteError(where + " is not finite");
    if (!value.is_number()) throw CheckpointFormatError(where + " must be a number");
    const double v = value.get<double>();
    if (!std::isfinite(v)) throw NonFiniteError(where + " is not finite");
    return v;
}

std::size_t size_value(const json& value, const std::string& where) {
    if (!value.is_number_integer() || value.get<long long>() < 0) {
        throw CheckpointFormatError(where + " must be a non-negative integer");
    }
    return value.get<std::size_t>();
}

}  // namespace

std::string format_real(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

std::string checkpoint_to_string(const MlpPolicy& policy) {
    std::string out;
    out += "{\n  \"format_version\": " + std::to_string(kCheckpointFormatVersion) + ",\n";
    out += "  \"layers\": [\n";
    const auto& layers = policy.layers();
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const DenseLayer& layer = layers[k];
        out += "    {\"in\": " + std::to_string(layer.in) + ", \"out\": " + std::to_string(layer.out) +
               ",\n     \"weights\": ";
        append_array(out, layer.weights);
        out += ",\n     \"bias\": ";
        append_array(out, layer.bias);
        out += k + 1 < layers.size() ? "},\n" : "}\n";
    }
    out += "  ],\n  \"activation\": \"tanh\",\n";
    const ObservationNormalizer& norm = policy.normalizer();
    out += "  \"normalizer\": {\"mean\": ";
    append_array(out, norm.mean);
    out += ", \"var\": ";
    append_array(out, norm.var);
    out += ", \"clip\": " + format_real(norm.clip) + ", \"eps\": " + format_real(norm.eps) + "},\n";
    out += "  \"action_low\": ";
    append_array(out, policy.action_low());
    out += ",\n  \"action_high\": ";
    append_array(out, policy.action_high());
    out += "\n}\n";
    return out;
}

MlpPolicy checkpoint_from_string(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::out_of_range& e) {
        // Number overflow, e.g. a weight written as 1e999.
        throw NonFiniteError(std::string("checkpoint contains a non-finite number: ") + e.what());
    } catch (const json::exception& e) {
        throw CheckpointFormatError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw CheckpointFormatError("checkpoint must be a JSON object");

    const json& version = field(doc, "format_version", "checkpoint");
    if (!version.is_number_integer()) throw CheckpointFormatError("format_version must be an integer");
    if (version.get<long long>() != kCheckpointFormatVersion) {
        throw CheckpointVersionError("unsupported checkpoint format_version " + version.dump() + " (expected " +
                                     std::to_string(kCheckpointFormatVersion) + ")");
    }

    const json& activation = field(doc, "activation", "checkpoint");
    if (!activation.is_string() || activation.get<std::string>() != "tanh") {
        throw CheckpointFormatError("unsupported activation " + activation.dump() + " (only \"tanh\")");
    }

    const json& layers_json = field(doc, "layers", "checkpoint");
    if (!layers_json.is_array() || layers_json.empty()) {
        throw CheckpointFormatError("layers must be a non-empty array");
    }
    std::vector<DenseLayer> layers;
    for (std::size_t k = 0; k < layers_json.size(); ++k) {
        const json& lj = layers_json[k];
        const std::string where = "layers[" + std::to_string(k) + "]";
        if (!lj.is_object()) throw CheckpointFormatError(where + " must be an object");
        DenseLayer layer;
        layer.in = size_value(field(lj, "in", where), where + ".in");
        layer.out = size_value(field(lj, "out", where), where + ".out");
        layer.weights = real_array(field(lj, "weights", where), where + ".weights");
        layer.bias = real_array(field(lj, "bias", where), where + ".bias");
        layers.push_back(std::move(layer));
    }

    const json& nj = field(doc, "normalizer", "checkpoint");
    if (!nj.is_object()) throw CheckpointFormatError("normalizer must be an object");
    ObservationNormalizer normalizer;
    normalizer.mean = real_array(field(nj, "mean", "normalizer"), "normalizer.mean");
    normalizer.var = real_array(field(nj, "var", "normalizer"), "normalizer.var");
    if (auto it = nj.find("clip"); it != nj.end()) normalizer.clip = real_value(*it, "normalizer.clip");
    if (auto it = nj.find("eps"); it != nj.end()) normalizer.eps = real_value(*it, "normalizer.eps");

    Vector low = real_array(field(doc, "action_low", "checkpoint"), "action_low");
    Vector high = real_array(field(doc, "action_high", "checkpoint"), "action_high");

    return MlpPolicy(std::move(layers), std::move(normalizer), std::move(low), std::move(high));
}

void save_checkpoint(const MlpPolicy& policy, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
    out << checkpoint_to_string(policy);
    if (!out) throw CheckpointError("failed writing " + path.string());
}

MlpPolicy load_checkpoint(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw CheckpointNotFound("checkpoint not found: " + path.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointNotFound("checkpoint not found: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return checkpoint_from_string(buffer.str());
}

}  // namespace dps
