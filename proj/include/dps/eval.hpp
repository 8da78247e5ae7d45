#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dps/envs.hpp"
#include "dps/meshdim.hpp"
#include "dps/policy.hpp"

namespace dps {

inline constexpr std::size_t kDefaultEvalTrials = 100;
inline constexpr std::size_t kDefaultFailureTrials = 300;

struct TrialOutcome {
    std::uint64_t seed = 0;
    double episode_return = 0.0;
    bool terminated_early = false;
    std::optional<double> dimension;  // average mesh dimension of the trial's trace

    bool operator==(const TrialOutcome&) const = default;
};

struct EvalReport {
    std::string env;
    std::size_t n_trials = 0;
    double mean_return = 0.0;
    double std_return = 0.0;    // sample std (n - 1); 0 when n_trials == 1
    double failure_rate = 0.0;  // early terminations / n_trials
    std::optional<double> mean_dimension;
    std::vector<TrialOutcome> per_trial;

    bool operator==(const EvalReport&) const = default;
};

struct EvalOptions {
    std::size_t n_trials = kDefaultEvalTrials;
    std::uint64_t eval_seed_base = 0;
    bool with_dimension = false;
    MeshLadder mesh;
    std::size_t max_steps = 1000;
    unsigned workers = 1;
};

/// Trial i runs under derive_seed(eval_seed_base, kEvalNamespace, i), which is
/// disjoint from every training seed. Two policies evaluated with the same base
/// therefore see identical initial conditions.
EvalReport monte_carlo_eval(const MlpPolicy& policy, const EnvFactory& make_env, const EvalOptions& options);

/// Recomputes mean/std/failure rate (and mean dimension) from per_trial.
void summarize(EvalReport& report);

struct ComparisonReport {
    EvalReport baseline;
    EvalReport tuned;
    double mean_delta = 0.0;
    double std_delta = 0.0;
    double failure_delta = 0.0;  // as a fraction; x100 for percentage points
    std::optional<double> dimension_delta;
};

/// Throws InvalidArgument if the reports are for different environments or trial counts.
ComparisonReport compare(const EvalReport& baseline, const EvalReport& tuned);

std::string render_table(const EvalReport& report);
std::string render_table(const ComparisonReport& comparison);

nlohmann::json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ComparisonReport& comparison);

void save_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

}  // namespace dps
