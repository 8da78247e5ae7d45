#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "dps/envs.hpp"
#include "dps/policy.hpp"

namespace dps {

struct RolloutResult {
    double episode_return = 0.0;  // undiscounted, summed left to right
    std::size_t steps = 0;
    bool terminated_early = false;
    Vector initial_observation;  // raw observation returned by reset()
    /// Normalized policy inputs, one per step, when recording was requested.
    std::optional<std::vector<Vector>> trace;
};

/// Runs one MLA episode: reset(seed), then obs -> forward_mla -> step until the
/// environment reports done or `max_steps` steps were taken.
///
/// Throws RolloutError naming the step index if the environment emits a
/// non-finite observation or reward.
RolloutResult run_episode(Environment& env, const MlpPolicy& policy, std::uint64_t seed, std::size_t max_steps,
                          bool record_trace);

RolloutResult run_episode(const EnvFactory& make_env, const MlpPolicy& policy, std::uint64_t seed,
                          std::size_t max_steps, bool record_trace);

/// Runs fn(0) ... fn(n-1) on up to `workers` threads. Each index is handled
/// exactly once; if several calls throw, the exception of the lowest index is
/// rethrown after all threads have joined.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

/// Something that scores a parameter vector under an episode seed. The search
/// only sees this interface; PolicyObjective adapts a policy + environment.
/// evaluate() must be thread-safe and a pure function of its arguments.
class Objective {
public:
    virtual ~Objective() = default;
    virtual std::size_t dimension() const = 0;
    virtual RolloutResult evaluate(const ParamVector& theta, std::uint64_t seed) const = 0;
};

class PolicyObjective final : public Objective {
public:
    PolicyObjective(MlpPolicy policy_template, EnvFactory make_env, std::size_t max_steps, bool record_trace);

    std::size_t dimension() const override { return template_.parameter_count(); }
    RolloutResult evaluate(const ParamVector& theta, std::uint64_t seed) const override;

    const MlpPolicy& policy_template() const { return template_; }

private:
    MlpPolicy template_;
    EnvFactory make_env_;
    std::size_t max_steps_;
    bool record_trace_;
};

struct PairResults {
    std::vector<RolloutResult> plus;   // theta + delta_i
    std::vector<RolloutResult> minus;  // theta - delta_i

    std::vector<double> returns_plus() const;
    std::vector<double> returns_minus() const;
};

/// Evaluates theta + delta_i and theta - delta_i, both under seeds[i]. Results
/// are stored by index, so the output does not depend on `workers`.
/// Errors are rethrown as RolloutError naming the offending pair.
PairResults evaluate_pairs(const Objective& objective, const ParamVector& theta, std::span<const ParamVector> deltas,
                           std::span<const std::uint64_t> seeds, unsigned workers = 1);

/// Trace CSV: header "step,obs_0,...,obs_{d-1}", then one row per step.
void write_trace_csv(std::ostream& out, std::span<const Vector> trace);
void write_trace_csv(const std::filesystem::path& path, std::span<const Vector> trace);
std::vector<Vector> read_trace_csv(std::istream& in);
std::vector<Vector> read_trace_csv(const std::filesystem::path& path);

}  // namespace dps
