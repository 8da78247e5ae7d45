#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dps/envs.hpp"
#include "dps/meshdim.hpp"
#include "dps/policy.hpp"
#include "dps/random.hpp"
#include "dps/rollout.hpp"

namespace dps {

/// start + (end - start) * k / (K - 1) over K updates; hits both endpoints exactly.
struct LinearSchedule {
    double start = 0.0;
    double end = 0.0;

    double value(std::size_t k, std::size_t total) const;
};

struct SearchConfig {
    std::size_t n_deltas = 64;
    std::size_t n_updates = 200;
    LinearSchedule alpha{0.02, 0.002};
    LinearSchedule sigma{0.025, 0.0025};
    std::uint64_t master_seed = 0;
    RewardMode reward_mode = RewardMode::raw;
    MeshLadder mesh;  // used only when reward_mode != raw
    std::size_t max_episode_steps = 1000;

    /// Throws ConfigError.
    void validate() const;
};

struct UpdateRecord {
    std::size_t update_index = 0;
    double alpha_used = 0.0;
    double sigma_used = 0.0;
    std::vector<double> returns_plus;   // after shaping; what the update used
    std::vector<double> returns_minus;
    double raw_mean_return = 0.0;       // mean raw return of all 2n rollouts
    double sigma_R = 0.0;
    bool skipped = false;               // sigma_R below threshold, theta unchanged
    double theta_norm_after = 0.0;
};

/// Returns below this pooled spread are treated as ties and skip the update.
inline constexpr double kMinReturnStd = 1e-8;

/// n vectors of `dim` i.i.d. N(0, sigma^2) entries, drawn in order from `stream`.
std::vector<ParamVector> sample_deltas(std::size_t dim, std::size_t n, double sigma, Rng& stream);

/// Sample standard deviation (denominator 2n - 1) of all 2n returns pooled.
double pooled_return_std(std::span<const double> returns_plus, std::span<const double> returns_minus);

/// theta + alpha / (n sigma_R) * sum_i (R+_i - R-_i) delta_i, where R+_i is the
/// return of theta + delta_i. Returns theta unchanged when sigma_R < 1e-8.
ParamVector update_theta(const ParamVector& theta, std::span<const ParamVector> deltas,
                         std::span<const double> returns_plus, std::span<const double> returns_minus, double alpha);

struct StepResult {
    ParamVector theta;
    UpdateRecord record;
};

/// One update of the direct search.
///
/// Draws n standard-normal directions z_i from the update's own stream, runs
/// theta +/- sigma_k z_i under the shared seed derive_seed(master, k, i), shapes
/// the returns if a dimension mode is active, and moves along the z_i with
/// step alpha_k / (n sigma_R). Normalizing by sigma_R makes the step
/// independent of the return scale.
StepResult search_step(const ParamVector& theta, const Objective& objective, const SearchConfig& config,
                       std::size_t update_index, unsigned workers = 1);

using UpdateCallback = std::function<void(const UpdateRecord&)>;

struct SearchResult {
    ParamVector theta;
    std::vector<UpdateRecord> history;
};

/// n_updates sequential search steps from theta0.
SearchResult run_search(const ParamVector& theta0, const Objective& objective, const SearchConfig& config,
                        unsigned workers = 1, const UpdateCallback& on_update = {});

struct FinetuneResult {
    MlpPolicy policy;
    std::vector<UpdateRecord> history;
};

/// Fine-tunes every weight and bias of `initial` on the environment. The
/// normalizer and action bounds are carried over untouched.
FinetuneResult finetune(const MlpPolicy& initial, const EnvFactory& make_env, const SearchConfig& config,
                        unsigned workers = 1, const UpdateCallback& on_update = {});

}  // namespace dps
