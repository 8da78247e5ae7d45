#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dps/policy.hpp"

namespace dps {

inline constexpr int kCheckpointFormatVersion = 1;

/// Serializes a policy to the checkpoint JSON schema:
///
///   {"format_version": 1,
///    "layers": [{"in": n, "out": m, "weights": [row-major, n*m], "bias": [m]}, ...],
///    "activation": "tanh",
///    "normalizer": {"mean": [...], "var": [...], "clip": c, "eps": e},
///    "action_low": [...], "action_high": [...]}
///
/// Reals are printed with 17 significant digits so a load restores every bit.
std::string checkpoint_to_string(const MlpPolicy& policy);

/// Parses and validates a checkpoint document. Missing "clip"/"eps" fall back
/// to 10.0 and 1e-8.
///
/// Throws CheckpointFormatError (bad JSON or schema), CheckpointVersionError,
/// NonFiniteError, DimensionChainError or InvalidArgument.
MlpPolicy checkpoint_from_string(std::string_view text);

void save_checkpoint(const MlpPolicy& policy, const std::filesystem::path& path);

/// Throws CheckpointNotFound when the file does not exist, otherwise as
/// checkpoint_from_string.
MlpPolicy load_checkpoint(const std::filesystem::path& path);

/// printf("%.17g") formatting shared by every data file the toolkit writes.
std::string format_real(double value);

}  // namespace dps
