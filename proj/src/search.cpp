#include "dps/search.hpp"

#include <cmath>
#include <string>

#include "dps/errors.hpp"

namespace dps {

double LinearSchedule::value(std::size_t k, std::size_t total) const {
    if (total <= 1) return start;
    // std::lerp is exact at t = 0 and t = 1.
    return std::lerp(start, end, static_cast<double>(k) / static_cast<double>(total - 1));
}

void SearchConfig::validate() const {
    if (n_deltas < 1) throw ConfigError("n_deltas must be at least 1");
    if (!(alpha.start > 0.0 && alpha.end > 0.0) || !std::isfinite(alpha.start) || !std::isfinite(alpha.end)) {
        throw ConfigError("alpha schedule must be strictly positive");
    }
    if (!(sigma.start > 0.0 && sigma.end > 0.0) || !std::isfinite(sigma.start) || !std::isfinite(sigma.end)) {
        throw ConfigError("sigma schedule must be strictly positive");
    }
    if (max_episode_steps < 1) throw ConfigError("max_episode_steps must be at least 1");
    if (reward_mode != RewardMode::raw) {
        try {
            mesh.validate();
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }
}

std::vector<ParamVector> sample_deltas(std::size_t dim, std::size_t n, double sigma, Rng& stream) {
    std::vector<ParamVector> deltas;
    deltas.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ParamVector delta(dim);
        for (std::size_t j = 0; j < dim; ++j) delta[j] = sigma * stream.normal();
        deltas.push_back(std::move(delta));
    }
    return deltas;
}

double pooled_return_std(std::span<const double> returns_plus, std::span<const double> returns_minus) {
    const std::size_t count = returns_plus.size() + returns_minus.size();
    if (count < 2) return 0.0;
    double sum = 0.0;
    for (double r : returns_plus) sum += r;
    for (double r : returns_minus) sum += r;
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (double r : returns_plus) ss += (r - mean) * (r - mean);
    for (double r : returns_minus) ss += (r - mean) * (r - mean);
    return std::sqrt(ss / static_cast<double>(count - 1));
}

ParamVector update_theta(const ParamVector& theta, std::span<const ParamVector> deltas,
                         std::span<const double> returns_plus, std::span<const double> returns_minus, double alpha) {
    const std::size_t n = deltas.size();
    if (n == 0) throw InvalidArgument("update_theta needs at least one perturbation");
    if (returns_plus.size() != n) throw DimensionError("returns_plus", n, returns_plus.size());
    if (returns_minus.size() != n) throw DimensionError("returns_minus", n, returns_minus.size());
    for (const ParamVector& delta : deltas) {
        if (delta.size() != theta.size()) throw DimensionError("perturbation", theta.size(), delta.size());
    }

    const double sigma_r = pooled_return_std(returns_plus, returns_minus);
    if (sigma_r < kMinReturnStd) return theta;

    // Indexed accumulation keeps the result independent of evaluation order.
    Vector direction(theta.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double weight = returns_plus[i] - returns_minus[i];
        const ParamVector& delta = deltas[i];
        for (std::size_t j = 0; j < direction.size(); ++j) direction[j] += weight * delta[j];
    }
    const double step = alpha / (static_cast<double>(n) * sigma_r);
    ParamVector updated = theta;
    for (std::size_t j = 0; j < direction.size(); ++j) updated[j] += step * direction[j];
    return updated;
}

namespace {

double shaped(const RolloutResult& result, const SearchConfig& config) {
    if (config.reward_mode == RewardMode::raw) return result.episode_return;
    if (!result.trace) throw UsageError("dimension reward requested but the objective records no trace");
    const DimensionEstimate dim = estimate_dimension(*result.trace, config.mesh);
    return shaped_return(result.episode_return, dim, config.reward_mode);
}

}  // namespace

StepResult search_step(const ParamVector& theta, const Objective& objective, const SearchConfig& config,
                       std::size_t update_index, unsigned workers) {
    if (theta.size() != objective.dimension()) {
        throw DimensionError("theta", objective.dimension(), theta.size());
    }
    if (update_index >= config.n_updates) {
        throw InvalidArgument("update_index " + std::to_string(update_index) + " outside [0, " +
                              std::to_string(config.n_updates) + ")");
    }
    const std::size_t n = config.n_deltas;
    const double alpha = config.alpha.value(update_index, config.n_updates);
    const double sigma = config.sigma.value(update_index, config.n_updates);

    Rng stream(derive_seed(config.master_seed, update_index, kDeltaStreamPair));
    const std::vector<ParamVector> directions = sample_deltas(theta.size(), n, 1.0, stream);

    std::vector<ParamVector> perturbations;
    perturbations.reserve(n);
    for (const ParamVector& z : directions) {
        ParamVector delta(z.size());
        for (std::size_t j = 0; j < z.size(); ++j) delta[j] = sigma * z[j];
        perturbations.push_back(std::move(delta));
    }
    std::vector<std::uint64_t> seeds(n);
    for (std::size_t i = 0; i < n; ++i) seeds[i] = derive_seed(config.master_seed, update_index, i);

    const PairResults pairs = evaluate_pairs(objective, theta, perturbations, seeds, workers);

    UpdateRecord record;
    record.update_index = update_index;
    record.alpha_used = alpha;
    record.sigma_used = sigma;
    record.returns_plus.resize(n);
    record.returns_minus.resize(n);
    double raw_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        record.returns_plus[i] = shaped(pairs.plus[i], config);
        record.returns_minus[i] = shaped(pairs.minus[i], config);
        raw_sum += pairs.plus[i].episode_return;
        raw_sum += pairs.minus[i].episode_return;
    }
    record.raw_mean_return = raw_sum / static_cast<double>(2 * n);
    record.sigma_R = pooled_return_std(record.returns_plus, record.returns_minus);
    record.skipped = record.sigma_R < kMinReturnStd;

    StepResult result{update_theta(theta, directions, record.returns_plus, record.returns_minus, alpha), {}};
    record.theta_norm_after = l2_norm(result.theta);
    result.record = std::move(record);
    return result;
}

SearchResult run_search(const ParamVector& theta0, const Objective& objective, const SearchConfig& config,
                        unsigned workers, const UpdateCallback& on_update) {
    config.validate();
    SearchResult result{theta0, {}};
    result.history.reserve(config.n_updates);
    for (std::size_t k = 0; k < config.n_updates; ++k) {
        StepResult step = search_step(result.theta, objective, config, k, workers);
        result.theta = std::move(step.theta);
        if (on_update) on_update(step.record);
        result.history.push_back(std::move(step.record));
    }
    return result;
}

FinetuneResult finetune(const MlpPolicy& initial, const EnvFactory& make_env, const SearchConfig& config,
                        unsigned workers, const UpdateCallback& on_update) {
    config.validate();
    const auto probe = make_env();
    const EnvSpec& spec = probe->spec();
    if (initial.obs_dim() != spec.obs_dim) throw DimensionError("policy input for " + spec.name, spec.obs_dim, initial.obs_dim());
    if (initial.act_dim() != spec.act_dim) throw DimensionError("policy output for " + spec.name, spec.act_dim, initial.act_dim());
    if (config.reward_mode == RewardMode::dim_ratio && spec.reward_sign == RewardSign::negative_returns) {
        throw ConfigError("dim_ratio only works for environments with positive rewards; " + spec.name +
                          " has negative returns, use dim_product");
    }

    const PolicyObjective objective(initial, make_env, config.max_episode_steps, config.reward_mode != RewardMode::raw);
    SearchResult search = run_search(flatten(initial), objective, config, workers, on_update);
    return {unflatten(initial, search.theta), std::move(search.history)};
}

}  // namespace dps
