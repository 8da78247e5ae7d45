#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace dps {

// Seed namespaces. Training rollouts use derive_seed(master, update, pair) with
// update < 2^63; everything else lives above that.
inline constexpr std::uint64_t kEvalNamespace = std::uint64_t{1} << 63;
inline constexpr std::uint64_t kNormalizerNamespace = kEvalNamespace + 1;
inline constexpr std::uint64_t kInitNamespace = kEvalNamespace + 2;
inline constexpr std::uint64_t kPretrainNamespace = kEvalNamespace + 3;
// Pair index reserved for the per-update perturbation stream.
inline constexpr std::uint64_t kDeltaStreamPair = ~std::uint64_t{0};

/// SplitMix64 output finalizer. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Episode seed for (update, pair) under a master seed:
///   mix(master ^ update*0x9E3779B97F4A7C15 ^ pair*0xBF58476D1CE4E5B9)
/// Both members of an antithetic pair are run with this same seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t update, std::uint64_t pair) {
    return splitmix64_mix(master ^ (update * 0x9E3779B97F4A7C15ULL) ^ (pair * 0xBF58476D1CE4E5B9ULL));
}

/// Deterministic generator: std::mt19937_64 bits (bit-exact across standard
/// libraries) with our own portable uniform and Gaussian transforms, since the
/// std distributions are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi): lo + (hi - lo) * u.
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller. Uniforms are consumed two at a time; the
    /// cosine branch is returned first and the sine branch is cached for the next call.
    double normal();

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

}  // namespace dps
