#include "dps/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "dps/errors.hpp"

namespace dps {

namespace {

bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void require_finite(std::span<const double> values, const std::string& what) {
    if (!all_finite(values)) {
        throw NonFiniteError(what + " contains NaN or Inf");
    }
}

// y = W x + b, accumulated left to right.
void affine(const DenseLayer& layer, std::span<const double> x, Vector& y) {
    y.resize(layer.out);
    const double* w = layer.weights.data();
    for (std::size_t o = 0; o < layer.out; ++o) {
        double acc = layer.bias[o];
        const double* row = w + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) {
            acc += row[i] * x[i];
        }
        y[o] = acc;
    }
}

}  // namespace

void ObservationNormalizer::validate() const {
    if (var.size() != mean.size()) {
        throw DimensionError("normalizer var", mean.size(), var.size());
    }
    require_finite(mean, "normalizer mean");
    require_finite(var, "normalizer var");
    if (!std::isfinite(clip) || !std::isfinite(eps)) {
        throw NonFiniteError("normalizer clip/eps must be finite");
    }
    if (std::any_of(var.begin(), var.end(), [](double v) { return v < 0.0; })) {
        throw InvalidArgument("normalizer variance must be non-negative");
    }
    if (clip <= 0.0) throw InvalidArgument("normalizer clip must be positive");
    if (eps <= 0.0) throw InvalidArgument("normalizer eps must be positive");
}

Vector normalize(const ObservationNormalizer& normalizer, std::span<const double> obs) {
    if (obs.size() != normalizer.mean.size()) {
        throw DimensionError("observation", normalizer.mean.size(), obs.size());
    }
    Vector out(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double z = (obs[i] - normalizer.mean[i]) / std::sqrt(normalizer.var[i] + normalizer.eps);
        out[i] = std::clamp(z, -normalizer.clip, normalizer.clip);
    }
    return out;
}

std::uint64_t normalizer_checksum(const ObservationNormalizer& normalizer) {
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    auto feed = [&hash](double value) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &value, sizeof(double));
        for (unsigned char b : bytes) {
            hash ^= b;
            hash *= 0x100000001B3ULL;
        }
    };
    for (double v : normalizer.mean) feed(v);
    for (double v : normalizer.var) feed(v);
    feed(normalizer.clip);
    feed(normalizer.eps);
    return hash;
}

double l2_norm(const ParamVector& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

MlpPolicy::MlpPolicy(std::vector<DenseLayer> layers, ObservationNormalizer normalizer, Vector action_low,
                     Vector action_high, Activation activation)
    : layers_(std::move(layers)),
      normalizer_(std::move(normalizer)),
      action_low_(std::move(action_low)),
      action_high_(std::move(action_high)),
      activation_(activation) {
    if (layers_.empty()) {
        throw DimensionChainError("policy needs at least one layer");
    }
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const DenseLayer& layer = layers_[k];
        const std::string name = "layer " + std::to_string(k);
        if (layer.in == 0 || layer.out == 0) {
            throw DimensionChainError(name + " has a zero dimension");
        }
        if (layer.weights.size() != layer.in * layer.out) {
            throw DimensionChainError(name + " weights: expected " + std::to_string(layer.in * layer.out) +
                                      " entries, got " + std::to_string(layer.weights.size()));
        }
        if (layer.bias.size() != layer.out) {
            throw DimensionChainError(name + " bias: expected " + std::to_string(layer.out) + " entries, got " +
                                      std::to_string(layer.bias.size()));
        }
        if (k > 0 && layers_[k - 1].out != layer.in) {
            throw DimensionChainError("layer " + std::to_string(k - 1) + " outputs " +
                                      std::to_string(layers_[k - 1].out) + " values but " + name + " expects " +
                                      std::to_string(layer.in));
        }
        require_finite(layer.weights, name + " weights");
        require_finite(layer.bias, name + " bias");
    }
    if (normalizer_.mean.size() != obs_dim() || normalizer_.var.size() != obs_dim()) {
        throw DimensionChainError("normalizer dimension " + std::to_string(normalizer_.mean.size()) +
                                  " does not match policy input " + std::to_string(obs_dim()));
    }
    normalizer_.validate();
    if (action_low_.size() != act_dim() || action_high_.size() != act_dim()) {
        throw DimensionChainError("action bounds must have length " + std::to_string(act_dim()));
    }
    require_finite(action_low_, "action_low");
    require_finite(action_high_, "action_high");
    for (std::size_t j = 0; j < act_dim(); ++j) {
        if (!(action_low_[j] < action_high_[j])) {
            throw InvalidArgument("action_low must be below action_high at index " + std::to_string(j));
        }
    }
}

std::size_t MlpPolicy::parameter_count() const {
    std::size_t n = 0;
    for (const DenseLayer& layer : layers_) n += layer.out * layer.in + layer.out;
    return n;
}

Vector forward_normalized(const MlpPolicy& policy, std::span<const double> normalized_obs) {
    if (normalized_obs.size() != policy.obs_dim()) {
        throw DimensionError("observation", policy.obs_dim(), normalized_obs.size());
    }
    Vector x(normalized_obs.begin(), normalized_obs.end());
    Vector y;
    for (const DenseLayer& layer : policy.layers()) {
        affine(layer, x, y);
        for (double& v : y) v = std::tanh(v);
        x.swap(y);
    }
    const Vector& low = policy.action_low();
    const Vector& high = policy.action_high();
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double a = low[j] + (x[j] + 1.0) * 0.5 * (high[j] - low[j]);
        // Only ever moves the result by rounding error at the saturated ends.
        x[j] = std::clamp(a, low[j], high[j]);
    }
    return x;
}

Vector forward_mla(const MlpPolicy& policy, std::span<const double> obs) {
    return forward_normalized(policy, normalize(policy.normalizer(), obs));
}

ParamVector flatten(const MlpPolicy& policy) {
    Vector values;
    values.reserve(policy.parameter_count());
    for (const DenseLayer& layer : policy.layers()) {
        values.insert(values.end(), layer.weights.begin(), layer.weights.end());
        values.insert(values.end(), layer.bias.begin(), layer.bias.end());
    }
    return ParamVector(std::move(values));
}

MlpPolicy unflatten(const MlpPolicy& policy_template, const ParamVector& params) {
    if (params.size() != policy_template.parameter_count()) {
        throw DimensionError("parameter vector", policy_template.parameter_count(), params.size());
    }
    std::vector<DenseLayer> layers = policy_template.layers();
    std::size_t offset = 0;
    for (DenseLayer& layer : layers) {
        std::copy_n(params.data() + offset, layer.weights.size(), layer.weights.begin());
        offset += layer.weights.size();
        std::copy_n(params.data() + offset, layer.bias.size(), layer.bias.begin());
        offset += layer.bias.size();
    }
    return MlpPolicy(std::move(layers), policy_template.normalizer(), policy_template.action_low(),
                     policy_template.action_high(), policy_template.activation());
}

}  // namespace dps
