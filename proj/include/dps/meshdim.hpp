#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dps/policy.hpp"

namespace dps {

/// Geometric ladder of cell sizes s_k = base_scale * ratio^k, k = 0..num_scales-1.
struct MeshLadder {
    double base_scale = 0.5;
    double ratio = 0.5;
    std::size_t num_scales = 4;

    /// Throws InvalidArgument unless base_scale > 0, 0 < ratio < 1, num_scales >= 2.
    void validate() const;
    double scale(std::size_t k) const;
};

struct DimensionEstimate {
    double lower = 0.0;
    double upper = 0.0;
    double average = 0.0;  // (lower + upper) / 2
    std::vector<std::pair<double, std::size_t>> counts;  // (scale, occupied cells), coarse to fine
};

/// Number of distinct integer cells (floor(p_0/s), ..., floor(p_{d-1}/s)) hit
/// by the cloud.
std::size_t occupied_cells(std::span<const Vector> cloud, double scale);

/// Box-counting dimension bracket. For each adjacent pair of scales the slope
///   ln(N(s_{k+1}) / N(s_k)) / ln(s_k / s_{k+1})
/// is clamped to [0, d]; lower/upper are the min/max slope.
///
/// Throws InvalidArgument for an empty or ragged cloud and NonFiniteError for
/// non-finite points. A single distinct point yields zero everywhere.
DimensionEstimate estimate_dimension(std::span<const Vector> cloud, const MeshLadder& ladder);

enum class RewardMode { raw, dim_ratio, dim_product };

/// Dimension-shaped return, with D = max(dimension, 1):
///   dim_ratio   -> raw / D   (positive-return tasks only)
///   dim_product -> D * raw
///   raw         -> raw
/// Throws RewardSignError for dim_ratio with raw <= 0.
double shaped_return(double raw_return, double dimension, RewardMode mode);
double shaped_return(double raw_return, const DimensionEstimate& dimension, RewardMode mode);

std::string to_string(RewardMode mode);
/// Throws ConfigError for unknown names.
RewardMode parse_reward_mode(std::string_view name);

}  // namespace dps
