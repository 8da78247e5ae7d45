#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dps {

using Vector = std::vector<double>;

/// Frozen per-coordinate standardization followed by clipping:
///   clamp((obs - mean) / sqrt(var + eps), -clip, +clip)
/// The statistics come from pretraining and are never updated afterwards.
struct ObservationNormalizer {
    Vector mean;
    Vector var;
    double clip = 10.0;
    double eps = 1e-8;

    std::size_t dim() const { return mean.size(); }

    /// Throws DimensionError, NonFiniteError or InvalidArgument.
    void validate() const;

    bool operator==(const ObservationNormalizer&) const = default;
};

Vector normalize(const ObservationNormalizer& normalizer, std::span<const double> obs);

/// FNV-1a over the bytes of (mean, var, clip, eps). Used to check that the
/// normalizer survives a fine-tuning run untouched.
std::uint64_t normalizer_checksum(const ObservationNormalizer& normalizer);

/// Fully connected layer. `weights` is the out x in matrix stored row-major,
/// i.e. weights[o * in + i] maps input i to output o.
struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    Vector weights;
    Vector bias;

    bool operator==(const DenseLayer&) const = default;
};

enum class Activation { tanh };

/// Flat parameter vector of an MlpPolicy.
///
/// Layout is layer-major; within a layer the weight matrix comes first
/// (row-major, out x in) followed by the bias. The normalizer and action bounds
/// are not part of it.
class ParamVector {
public:
    ParamVector() = default;
    explicit ParamVector(std::size_t size, double value = 0.0) : values_(size, value) {}
    explicit ParamVector(Vector values) : values_(std::move(values)) {}

    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    auto begin() const { return values_.begin(); }
    auto end() const { return values_.end(); }
    const Vector& values() const { return values_; }
    std::span<const double> span() const { return values_; }

    bool operator==(const ParamVector&) const = default;

private:
    Vector values_;
};

double l2_norm(const ParamVector& v);

/// Deterministic tanh MLP acting through its maximum-likelihood (mean) action.
///
/// Immutable after construction; the constructor validates the whole network
/// and throws DimensionChainError, NonFiniteError or InvalidArgument.
class MlpPolicy {
public:
    MlpPolicy(std::vector<DenseLayer> layers, ObservationNormalizer normalizer, Vector action_low,
              Vector action_high, Activation activation = Activation::tanh);

    const std::vector<DenseLayer>& layers() const { return layers_; }
    const ObservationNormalizer& normalizer() const { return normalizer_; }
    const Vector& action_low() const { return action_low_; }
    const Vector& action_high() const { return action_high_; }
    Activation activation() const { return activation_; }

    std::size_t obs_dim() const { return layers_.front().in; }
    std::size_t act_dim() const { return layers_.back().out; }
    std::size_t parameter_count() const;

    bool operator==(const MlpPolicy&) const = default;

private:
    std::vector<DenseLayer> layers_;
    ObservationNormalizer normalizer_;
    Vector action_low_;
    Vector action_high_;
    Activation activation_;
};

/// Deterministic action: hidden layers apply tanh(Wx + b); the output layer
/// applies tanh and rescales to [low, high] via low + (t + 1)/2 * (high - low).
Vector forward_mla(const MlpPolicy& policy, std::span<const double> obs);

/// Same as forward_mla, but takes an observation that is already normalized.
Vector forward_normalized(const MlpPolicy& policy, std::span<const double> normalized_obs);

ParamVector flatten(const MlpPolicy& policy);

/// New policy with the template's architecture, normalizer and bounds, and the
/// weights/biases taken from `params`. Throws DimensionError on length mismatch.
MlpPolicy unflatten(const MlpPolicy& policy_template, const ParamVector& params);

}  // namespace dps
