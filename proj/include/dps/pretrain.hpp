#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dps/envs.hpp"
#include "dps/policy.hpp"
#include "dps/search.hpp"

namespace dps {

/// Truncated search budgets: weak = 20 updates, medium = 60.
enum class PretrainQuality { weak, medium };

struct PretrainConfig {
    SearchConfig search;  // master_seed seeds init, normalizer and search
    std::vector<std::size_t> hidden_sizes{32, 32};
    std::size_t normalizer_samples = 100;
    PretrainQuality quality = PretrainQuality::weak;

    std::size_t update_budget() const { return quality == PretrainQuality::weak ? 20 : 60; }
    void validate() const;
};

/// Per-coordinate mean and (population) variance of every observation seen in
/// `samples` episodes of uniformly random actions. clip = 10, eps = 1e-8.
ObservationNormalizer fit_normalizer(const EnvFactory& make_env, std::size_t samples, std::uint64_t seed);

/// Tanh MLP with weights and biases uniform in +/- 1/sqrt(fan_in).
MlpPolicy initial_policy(const EnvSpec& spec, std::span<const std::size_t> hidden_sizes,
                         ObservationNormalizer normalizer, std::uint64_t seed);

/// Deliberately under-trained baseline: random init, fitted normalizer, then a
/// truncated direct search with the configured schedules stretched over the
/// quality budget.
MlpPolicy pretrain(const EnvFactory& make_env, const PretrainConfig& config, unsigned workers = 1);

std::string to_string(PretrainQuality quality);
PretrainQuality parse_quality(std::string_view name);

}  // namespace dps
