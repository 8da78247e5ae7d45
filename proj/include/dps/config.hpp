#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "dps/pretrain.hpp"
#include "dps/search.hpp"

namespace dps {

/// Contents of a run configuration file.
///
/// The format is a flat TOML subset: `key = value` lines, `#` comments,
/// quoted or bare strings, numbers, and integer arrays. Recognized keys:
///
///   env, n_deltas, n_updates, alpha_start, alpha_end, sigma_start, sigma_end,
///   master_seed, reward_mode, mesh_scales, mesh_base, max_episode_steps
///
/// plus the pretraining keys hidden_sizes, normalizer_samples and quality.
/// Unknown or repeated keys are rejected; absent keys keep their defaults.
struct RunConfig {
    std::optional<std::string> env;
    PretrainConfig pretrain;  // pretrain.search carries the search keys

    const SearchConfig& search() const { return pretrain.search; }
    SearchConfig& search() { return pretrain.search; }
};

/// Throws ConfigError with the offending line number.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace dps
