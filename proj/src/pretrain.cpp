#include "dps/pretrain.hpp"

#include <cmath>

#include "dps/errors.hpp"
#include "dps/random.hpp"

namespace dps {

void PretrainConfig::validate() const {
    search.validate();
    if (normalizer_samples < 1) throw ConfigError("normalizer_samples must be at least 1");
    for (std::size_t h : hidden_sizes) {
        if (h < 1) throw ConfigError("hidden layer sizes must be at least 1");
    }
}

ObservationNormalizer fit_normalizer(const EnvFactory& make_env, std::size_t samples, std::uint64_t seed) {
    if (samples < 1) throw InvalidArgument("fit_normalizer needs at least one sample episode");
    auto env = make_env();
    const EnvSpec& spec = env->spec();

    std::vector<Vector> seen;
    for (std::size_t i = 0; i < samples; ++i) {
        const std::uint64_t episode_seed = derive_seed(seed, kNormalizerNamespace, i);
        Rng actions(derive_seed(episode_seed, kNormalizerNamespace, 0));
        seen.push_back(env->reset(episode_seed));
        Vector action(spec.act_dim);
        while (!env->done()) {
            for (std::size_t j = 0; j < spec.act_dim; ++j) {
                action[j] = actions.uniform(spec.action_low[j], spec.action_high[j]);
            }
            seen.push_back(env->step(action).observation);
        }
    }

    ObservationNormalizer normalizer;
    normalizer.mean.assign(spec.obs_dim, 0.0);
    normalizer.var.assign(spec.obs_dim, 0.0);
    const double count = static_cast<double>(seen.size());
    for (const Vector& obs : seen) {
        for (std::size_t j = 0; j < spec.obs_dim; ++j) normalizer.mean[j] += obs[j];
    }
    for (double& m : normalizer.mean) m /= count;
    for (const Vector& obs : seen) {
        for (std::size_t j = 0; j < spec.obs_dim; ++j) {
            const double d = obs[j] - normalizer.mean[j];
            normalizer.var[j] += d * d;
        }
    }
    for (double& v : normalizer.var) v /= count;
    normalizer.clip = 10.0;
    normalizer.eps = 1e-8;
    return normalizer;
}

MlpPolicy initial_policy(const EnvSpec& spec, std::span<const std::size_t> hidden_sizes,
                         ObservationNormalizer normalizer, std::uint64_t seed) {
    std::vector<std::size_t> widths{spec.obs_dim};
    widths.insert(widths.end(), hidden_sizes.begin(), hidden_sizes.end());
    widths.push_back(spec.act_dim);

    Rng rng(derive_seed(seed, kInitNamespace, 0));
    std::vector<DenseLayer> layers;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        DenseLayer layer{widths[k], widths[k + 1], Vector(widths[k] * widths[k + 1]), Vector(widths[k + 1])};
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
        for (double& w : layer.weights) w = rng.uniform(-bound, bound);
        for (double& b : layer.bias) b = rng.uniform(-bound, bound);
        layers.push_back(std::move(layer));
    }
    return MlpPolicy(std::move(layers), std::move(normalizer), spec.action_low, spec.action_high);
}

MlpPolicy pretrain(const EnvFactory& make_env, const PretrainConfig& config, unsigned workers) {
    config.validate();
    const std::uint64_t seed = config.search.master_seed;
    const auto probe = make_env();
    ObservationNormalizer normalizer = fit_normalizer(make_env, config.normalizer_samples, seed);
    const MlpPolicy start = initial_policy(probe->spec(), config.hidden_sizes, std::move(normalizer), seed);

    SearchConfig search = config.search;
    search.n_updates = config.update_budget();
    // Keeps pretraining perturbations apart from a later fine-tune with the same seed.
    search.master_seed = derive_seed(seed, kPretrainNamespace, 0);
    return finetune(start, make_env, search, workers).policy;
}

std::string to_string(PretrainQuality quality) { return quality == PretrainQuality::weak ? "weak" : "medium"; }

PretrainQuality parse_quality(std::string_view name) {
    if (name == "weak") return PretrainQuality::weak;
    if (name == "medium") return PretrainQuality::medium;
    throw ConfigError("unknown pretrain quality \"" + std::string(name) + "\" (expected weak or medium)");
}

}  // namespace dps
