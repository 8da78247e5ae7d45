#include "dps/meshdim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "dps/errors.hpp"

namespace dps {

void MeshLadder::validate() const {
    if (!(base_scale > 0.0) || !std::isfinite(base_scale)) {
        throw InvalidArgument("mesh base_scale must be positive and finite");
    }
    if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("mesh ratio must lie in (0, 1)");
    if (num_scales < 2) throw InvalidArgument("mesh ladder needs at least 2 scales");
}

double MeshLadder::scale(std::size_t k) const { return base_scale * std::pow(ratio, static_cast<double>(k)); }

namespace {

void check_cloud(std::span<const Vector> cloud) {
    if (cloud.empty()) throw InvalidArgument("state cloud is empty");
    const std::size_t dim = cloud.front().size();
    for (const Vector& p : cloud) {
        if (p.size() != dim) throw InvalidArgument("state cloud points have differing dimensions");
        for (double v : p) {
            if (!std::isfinite(v)) throw NonFiniteError("state cloud contains a non-finite coordinate");
        }
    }
}

std::size_t count_cells(std::span<const Vector> cloud, double scale) {
    const std::size_t dim = cloud.front().size();
    std::vector<std::int64_t> keys;
    keys.reserve(cloud.size() * dim);
    constexpr double limit = 9.0e18;
    for (const Vector& p : cloud) {
        for (double v : p) {
            const double cell = std::floor(v / scale);
            if (std::abs(cell) > limit) throw InvalidArgument("cell index overflow; scale too small for the cloud");
            keys.push_back(static_cast<std::int64_t>(cell));
        }
    }
    if (dim == 0) return 1;
    std::vector<std::size_t> order(cloud.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto row = [&](std::size_t i) { return keys.begin() + static_cast<std::ptrdiff_t>(i * dim); };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(row(a), row(a) + static_cast<std::ptrdiff_t>(dim), row(b),
                                            row(b) + static_cast<std::ptrdiff_t>(dim));
    });
    std::size_t distinct = 1;
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (!std::equal(row(order[i]), row(order[i]) + static_cast<std::ptrdiff_t>(dim), row(order[i - 1]))) {
            ++distinct;
        }
    }
    return distinct;
}

}  // namespace

std::size_t occupied_cells(std::span<const Vector> cloud, double scale) {
    if (!(scale > 0.0)) throw InvalidArgument("cell scale must be positive");
    check_cloud(cloud);
    return count_cells(cloud, scale);
}

DimensionEstimate estimate_dimension(std::span<const Vector> cloud, const MeshLadder& ladder) {
    ladder.validate();
    check_cloud(cloud);
    const double d = static_cast<double>(cloud.front().size());

    DimensionEstimate est;
    for (std::size_t k = 0; k < ladder.num_scales; ++k) {
        const double s = ladder.scale(k);
        est.counts.emplace_back(s, count_cells(cloud, s));
    }
    double lower = d;
    double upper = 0.0;
    for (std::size_t k = 0; k + 1 < est.counts.size(); ++k) {
        const auto [s0, n0] = est.counts[k];
        const auto [s1, n1] = est.counts[k + 1];
        const double slope = std::log(static_cast<double>(n1) / static_cast<double>(n0)) / std::log(s0 / s1);
        const double clamped = std::clamp(slope, 0.0, d);
        lower = std::min(lower, clamped);
        upper = std::max(upper, clamped);
    }
    est.lower = lower;
    est.upper = upper;
    est.average = (lower + upper) / 2.0;
    return est;
}

double shaped_return(double raw_return, double dimension, RewardMode mode) {
    const double D = std::max(dimension, 1.0);
    switch (mode) {
        case RewardMode::raw:
            return raw_return;
        case RewardMode::dim_ratio:
            if (!(raw_return > 0.0)) {
                throw RewardSignError("dim_ratio shaping only works for environments with positive rewards (got return " +
                                      std::to_string(raw_return) + "); use dim_product for negative returns");
            }
            return raw_return / D;
        case RewardMode::dim_product:
            return D * raw_return;
    }
    return raw_return;
}

double shaped_return(double raw_return, const DimensionEstimate& dimension, RewardMode mode) {
    return shaped_return(raw_return, dimension.average, mode);
}

std::string to_string(RewardMode mode) {
    switch (mode) {
        case RewardMode::raw: return "raw";
        case RewardMode::dim_ratio: return "dim_ratio";
        case RewardMode::dim_product: return "dim_product";
    }
    return "raw";
}

RewardMode parse_reward_mode(std::string_view name) {
    if (name == "raw") return RewardMode::raw;
    if (name == "dim_ratio") return RewardMode::dim_ratio;
    if (name == "dim_product") return RewardMode::dim_product;
    throw ConfigError("unknown reward mode \"" + std::string(name) + "\" (expected raw, dim_ratio or dim_product)");
}

}  // namespace dps
