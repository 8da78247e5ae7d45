#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "dps/envs.hpp"
#include "dps/policy.hpp"
#include "dps/rollout.hpp"

namespace dps::test {

inline ObservationNormalizer identity_normalizer(std::size_t dim, double clip = 10.0) {
    return ObservationNormalizer{Vector(dim, 0.0), Vector(dim, 1.0), clip, 1e-8};
}

/// Policy with all weights and biases zero; acts at the midpoint of its bounds.
inline MlpPolicy zero_policy(std::vector<std::size_t> widths, Vector low, Vector high) {
    std::vector<DenseLayer> layers;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        layers.push_back({widths[k], widths[k + 1], Vector(widths[k] * widths[k + 1], 0.0), Vector(widths[k + 1], 0.0)});
    }
    return MlpPolicy(std::move(layers), identity_normalizer(widths.front()), std::move(low), std::move(high));
}

inline MlpPolicy zero_policy_for(const EnvSpec& spec, std::vector<std::size_t> hidden = {}) {
    std::vector<std::size_t> widths{spec.obs_dim};
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(spec.act_dim);
    return zero_policy(widths, spec.action_low, spec.action_high);
}

/// Random policy with the given widths; weights ~ N(0, scale^2).
inline MlpPolicy random_policy(std::mt19937_64& gen, std::vector<std::size_t> widths, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    std::uniform_real_distribution<double> uni(0.1, 2.0);
    std::vector<DenseLayer> layers;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        DenseLayer layer{widths[k], widths[k + 1], Vector(widths[k] * widths[k + 1]), Vector(widths[k + 1])};
        for (double& w : layer.weights) w = normal(gen);
        for (double& b : layer.bias) b = normal(gen);
        layers.push_back(std::move(layer));
    }
    ObservationNormalizer norm;
    for (std::size_t j = 0; j < widths.front(); ++j) {
        norm.mean.push_back(normal(gen));
        norm.var.push_back(uni(gen));
    }
    Vector low, high;
    for (std::size_t j = 0; j < widths.back(); ++j) {
        const double lo = normal(gen);
        low.push_back(lo);
        high.push_back(lo + uni(gen));
    }
    return MlpPolicy(std::move(layers), std::move(norm), std::move(low), std::move(high));
}

/// f(theta) = -||theta - target||^2, ignoring the seed.
class QuadraticObjective final : public Objective {
public:
    explicit QuadraticObjective(Vector target) : target_(std::move(target)) {}
    std::size_t dimension() const override { return target_.size(); }
    RolloutResult evaluate(const ParamVector& theta, std::uint64_t) const override {
        double acc = 0.0;
        for (std::size_t j = 0; j < target_.size(); ++j) acc += (theta[j] - target_[j]) * (theta[j] - target_[j]);
        RolloutResult r;
        r.episode_return = -acc;
        r.steps = 1;
        return r;
    }

private:
    Vector target_;
};

/// Return equals the first parameter.
class LinearObjective final : public Objective {
public:
    explicit LinearObjective(std::size_t dim) : dim_(dim) {}
    std::size_t dimension() const override { return dim_; }
    RolloutResult evaluate(const ParamVector& theta, std::uint64_t) const override {
        RolloutResult r;
        r.episode_return = theta[0];
        r.steps = 1;
        return r;
    }

private:
    std::size_t dim_;
};

/// Emits a fixed observation forever; optionally poisons it at a given step.
class ConstantEnv final : public Environment {
public:
    explicit ConstantEnv(Vector obs, std::size_t nan_at_step = static_cast<std::size_t>(-1))
        : obs_(std::move(obs)), nan_at_(nan_at_step) {
        spec_ = EnvSpec{"constant", obs_.size(), 1, 25, RewardSign::mixed, {-1.0}, {1.0}};
    }
    const EnvSpec& spec() const override { return spec_; }

protected:
    Vector initialize(Rng&) override {
        t_ = 0;
        return obs_;
    }
    EnvStep advance(std::span<const double>) override {
        EnvStep s;
        s.observation = obs_;
        if (t_++ == nan_at_) s.observation[0] = std::nan("");
        s.reward = 1.0;
        return s;
    }

private:
    Vector obs_;
    std::size_t nan_at_;
    std::size_t t_ = 0;
    EnvSpec spec_;
};

}  // namespace dps::test
