#include <doctest.h>

#include <cmath>
#include <random>

#include "dps/errors.hpp"
#include "dps/pretrain.hpp"
#include "dps/search.hpp"
#include "helpers.hpp"

using namespace dps;

namespace {

// Straight re-derivation of the update, written without the library's helpers.
Vector reference_update(const Vector& theta, const std::vector<Vector>& deltas, const Vector& rp, const Vector& rm,
                        double alpha) {
    const std::size_t n = deltas.size();
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += rp[i] + rm[i];
    mean /= static_cast<double>(2 * n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (rp[i] - mean) * (rp[i] - mean) + (rm[i] - mean) * (rm[i] - mean);
    const double sigma_r = std::sqrt(ss / static_cast<double>(2 * n - 1));
    if (sigma_r < 1e-8) return theta;
    Vector out = theta;
    for (std::size_t j = 0; j < theta.size(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += (rp[i] - rm[i]) * deltas[i][j];
        out[j] += alpha / (static_cast<double>(n) * sigma_r) * acc;
    }
    return out;
}

std::vector<ParamVector> as_params(const std::vector<Vector>& vs) {
    std::vector<ParamVector> out;
    for (const Vector& v : vs) out.emplace_back(v);
    return out;
}

double distance(const ParamVector& a, const Vector& b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) acc += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(acc);
}

}  // namespace

TEST_SUITE("search") {

TEST_CASE("default schedules hit their endpoints exactly") {
    const SearchConfig c;
    CHECK(c.n_updates == 200);
    CHECK(c.n_deltas == 64);
    CHECK(c.alpha.value(0, 200) == 0.02);
    CHECK(c.alpha.value(199, 200) == 0.002);
    CHECK(c.sigma.value(0, 200) == 0.025);
    CHECK(c.sigma.value(199, 200) == 0.0025);
    CHECK(c.alpha.value(100, 200) == doctest::Approx(0.02 + (0.002 - 0.02) * 100.0 / 199.0).epsilon(1e-15));
    CHECK(LinearSchedule{3.0, 1.0}.value(0, 1) == 3.0);
}

TEST_CASE("sample_deltas statistics and determinism") {
    Rng stream(2024);
    const auto deltas = sample_deltas(1000, 1000, 0.025, stream);
    REQUIRE(deltas.size() == 1000);
    double sum = 0.0, sq = 0.0;
    for (const auto& d : deltas) {
        REQUIRE(d.size() == 1000);
        for (double v : d.values()) {
            sum += v;
            sq += v * v;
        }
    }
    const double mean = sum / 1e6;
    const double sd = std::sqrt(sq / 1e6 - mean * mean);
    CHECK(std::abs(mean) < 1e-4);
    CHECK(std::abs(sd - 0.025) < 0.02 * 0.025);

    Rng a(5), b(5);
    CHECK(sample_deltas(7, 3, 0.1, a) == sample_deltas(7, 3, 0.1, b));

    Rng tiny(6);
    for (const auto& d : sample_deltas(50, 20, 1e-300, tiny)) {
        for (double v : d.values()) CHECK(std::abs(v) < 1e-290);
    }
}

TEST_CASE("update_theta worked example") {
    // n = 1, sigma_R = sqrt(2), alpha = sqrt(2): step (3 - 1) along [1, 0].
    const ParamVector theta(Vector{0.5, -1.0});
    const std::vector<ParamVector> deltas{ParamVector(Vector{1.0, 0.0})};
    const ParamVector out = update_theta(theta, deltas, Vector{3.0}, Vector{1.0}, std::sqrt(2.0));
    CHECK(out[0] == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(out[1] == -1.0);
    CHECK(pooled_return_std(Vector{3.0}, Vector{1.0}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("update_theta matches the reference on random small cases") {
    std::mt19937_64 gen(77);
    std::uniform_int_distribution<std::size_t> n_dist(1, 4), dim_dist(1, 10);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = n_dist(gen), dim = dim_dist(gen);
        Vector theta(dim);
        for (double& v : theta) v = normal(gen);
        std::vector<Vector> deltas(n, Vector(dim));
        for (auto& d : deltas)
            for (double& v : d) v = 0.1 * normal(gen);
        Vector rp(n), rm(n);
        for (std::size_t i = 0; i < n; ++i) {
            rp[i] = 10.0 * normal(gen);
            rm[i] = 10.0 * normal(gen);
        }
        const double alpha = 0.01 + std::abs(normal(gen));
        const ParamVector got = update_theta(ParamVector(theta), as_params(deltas), rp, rm, alpha);
        const Vector want = reference_update(theta, deltas, rp, rm, alpha);
        for (std::size_t j = 0; j < dim; ++j) {
            CHECK(std::abs(got[j] - want[j]) <= 1e-12 * std::max(1.0, std::abs(want[j])));
        }
    }
}

TEST_CASE("update_theta skips when returns tie") {
    const ParamVector theta(Vector{1.0, 2.0, 3.0});
    const std::vector<ParamVector> deltas{ParamVector(Vector{1.0, 1.0, 1.0}), ParamVector(Vector{-2.0, 0.0, 5.0})};
    CHECK(update_theta(theta, deltas, Vector{4.0, 4.0}, Vector{4.0, 4.0}, 0.5) == theta);
    CHECK(update_theta(theta, deltas, Vector{4.0, 4.0 + 1e-12}, Vector{4.0, 4.0}, 0.5) == theta);
}

TEST_CASE("update_theta: antisymmetry, scale and shift invariance") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 6, dim = 5;
        ParamVector theta(dim);
        std::vector<ParamVector> deltas(n, ParamVector(dim));
        for (std::size_t j = 0; j < dim; ++j) theta[j] = normal(gen);
        for (auto& d : deltas)
            for (std::size_t j = 0; j < dim; ++j) d[j] = normal(gen);
        Vector rp(n), rm(n);
        for (std::size_t i = 0; i < n; ++i) {
            rp[i] = normal(gen);
            rm[i] = normal(gen);
        }
        const ParamVector base = update_theta(theta, deltas, rp, rm, 0.1);
        const ParamVector swapped = update_theta(theta, deltas, rm, rp, 0.1);
        Vector rp_scaled = rp, rm_scaled = rm, rp_shift = rp, rm_shift = rm;
        for (std::size_t i = 0; i < n; ++i) {
            rp_scaled[i] *= 37.5;
            rm_scaled[i] *= 37.5;
            rp_shift[i] += 1000.0;
            rm_shift[i] += 1000.0;
        }
        const ParamVector scaled = update_theta(theta, deltas, rp_scaled, rm_scaled, 0.1);
        const ParamVector shifted = update_theta(theta, deltas, rp_shift, rm_shift, 0.1);
        for (std::size_t j = 0; j < dim; ++j) {
            CHECK(swapped[j] - theta[j] == doctest::Approx(-(base[j] - theta[j])).epsilon(1e-12));
            CHECK(scaled[j] == doctest::Approx(base[j]).epsilon(1e-12));
            CHECK(shifted[j] == doctest::Approx(base[j]).epsilon(1e-9));
        }
    }
}

TEST_CASE("update_theta length checks") {
    const ParamVector theta(2);
    const std::vector<ParamVector> deltas{ParamVector(2)};
    CHECK_THROWS_AS(update_theta(theta, deltas, Vector{1.0, 2.0}, Vector{1.0}, 0.1), DimensionError);
    CHECK_THROWS_AS(update_theta(theta, std::vector<ParamVector>{ParamVector(3)}, Vector{1.0}, Vector{1.0}, 0.1),
                    DimensionError);
    CHECK_THROWS_AS(update_theta(theta, std::vector<ParamVector>{}, Vector{}, Vector{}, 0.1), InvalidArgument);
}

TEST_CASE("search_step ascends a linear objective") {
    const test::LinearObjective objective(4);
    SearchConfig c;
    c.n_deltas = 1;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        c.master_seed = seed;
        const ParamVector theta(4);
        const StepResult r = search_step(theta, objective, c, 0);
        CHECK(r.theta[0] > 0.0);
    }
}

TEST_CASE("search_step records what it used and is repeatable") {
    const test::QuadraticObjective objective(Vector(8, 1.0));
    SearchConfig c;
    c.n_deltas = 5;
    c.master_seed = 9;
    const ParamVector theta(8);
    const StepResult a = search_step(theta, objective, c, 17);
    const StepResult b = search_step(theta, objective, c, 17);
    CHECK(a.theta == b.theta);
    CHECK(a.record.returns_plus == b.record.returns_plus);
    CHECK(a.record.update_index == 17);
    CHECK(a.record.alpha_used == c.alpha.value(17, 200));
    CHECK(a.record.sigma_used == c.sigma.value(17, 200));
    CHECK(a.record.returns_plus.size() == 5);
    CHECK(a.record.sigma_R == pooled_return_std(a.record.returns_plus, a.record.returns_minus));
    CHECK(a.record.theta_norm_after == l2_norm(a.theta));
    CHECK_THROWS_AS(search_step(theta, objective, c, 200), InvalidArgument);
    CHECK_THROWS_AS(search_step(ParamVector(3), objective, c, 0), DimensionError);
}

TEST_CASE("paired rollouts share their initial observation") {
    const EnvSpec& spec = CorridorWalker::static_spec();
    const MlpPolicy p = initial_policy(spec, std::vector<std::size_t>{8}, test::identity_normalizer(4), 1);
    const PolicyObjective objective(p, make_env_factory("corridor"), 1000, false);
    SearchConfig c;
    c.n_deltas = 16;
    c.n_updates = 3;
    const auto result = run_search(flatten(p), objective, c);
    CHECK(result.history.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        Rng stream(derive_seed(c.master_seed, k, kDeltaStreamPair));
        const auto deltas = sample_deltas(p.parameter_count(), c.n_deltas, c.sigma.value(k, 3), stream);
        std::vector<std::uint64_t> seeds;
        for (std::size_t i = 0; i < c.n_deltas; ++i) seeds.push_back(derive_seed(c.master_seed, k, i));
        const PairResults pairs = evaluate_pairs(objective, flatten(p), deltas, seeds);
        for (std::size_t i = 0; i < c.n_deltas; ++i) {
            CHECK(pairs.plus[i].initial_observation == pairs.minus[i].initial_observation);
        }
    }
}

TEST_CASE("quadratic objective converges tenfold from a unit-norm start") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        std::mt19937_64 gen(seed);
        std::normal_distribution<double> normal;
        Vector target(50), start(50);
        for (double& v : target) v = normal(gen);
        Vector offset(50);
        double norm = 0.0;
        for (double& v : offset) {
            v = normal(gen);
            norm += v * v;
        }
        for (std::size_t j = 0; j < 50; ++j) start[j] = target[j] + offset[j] / std::sqrt(norm);

        const test::QuadraticObjective objective(target);
        SearchConfig c;
        c.master_seed = seed;
        const SearchResult r = run_search(ParamVector(start), objective, c);
        CHECK(r.history.size() == 200);
        CHECK(distance(r.theta, target) < 0.1 * distance(ParamVector(start), target));
    }
}

TEST_CASE("run_search with no updates returns the start") {
    const test::QuadraticObjective objective(Vector{1.0, 2.0});
    SearchConfig c;
    c.n_updates = 0;
    const ParamVector start(Vector{4.0, 4.0});
    const SearchResult r = run_search(start, objective, c);
    CHECK(r.theta == start);
    CHECK(r.history.empty());
}

TEST_CASE("finetune keeps the normalizer and bounds, and is reproducible") {
    const EnvSpec& spec = CorridorWalker::static_spec();
    const ObservationNormalizer norm{{0.1, -0.2, 0.0, 0.3}, {1.5, 0.5, 2.0, 0.25}, 5.0, 1e-8};
    const MlpPolicy p = initial_policy(spec, std::vector<std::size_t>{6}, norm, 4);
    SearchConfig c;
    c.n_updates = 4;
    c.n_deltas = 6;
    c.master_seed = 21;
    std::size_t callbacks = 0;
    const FinetuneResult a = finetune(p, make_env_factory("corridor"), c, 1, [&](const UpdateRecord&) { ++callbacks; });
    const FinetuneResult b = finetune(p, make_env_factory("corridor"), c, 3);
    CHECK(callbacks == 4);
    CHECK(a.history.size() == 4);
    CHECK(normalizer_checksum(a.policy.normalizer()) == normalizer_checksum(p.normalizer()));
    CHECK(a.policy.action_low() == p.action_low());
    CHECK(a.policy.action_high() == p.action_high());
    CHECK(a.policy == b.policy);
    CHECK(flatten(a.policy) != flatten(p));

    c.n_updates = 0;
    CHECK(finetune(p, make_env_factory("corridor"), c).policy == p);
}

TEST_CASE("finetune rejects mismatched policies and dim_ratio on negative tasks") {
    const MlpPolicy corridor_policy = test::zero_policy_for(CorridorWalker::static_spec());
    SearchConfig c;
    c.n_updates = 1;
    CHECK_THROWS_AS(finetune(corridor_policy, make_env_factory("pendulum"), c), DimensionError);

    c.reward_mode = RewardMode::dim_ratio;
    CHECK_THROWS_AS(finetune(test::zero_policy_for(PendulumSwingUp::static_spec()), make_env_factory("pendulum"), c),
                    ConfigError);
}

TEST_CASE("dimension shaping feeds the update") {
    const EnvSpec& spec = PendulumSwingUp::static_spec();
    const MlpPolicy p = initial_policy(spec, std::vector<std::size_t>{4}, test::identity_normalizer(3), 2);
    const PolicyObjective objective(p, make_env_factory("pendulum"), 1000, true);
    SearchConfig c;
    c.n_deltas = 3;
    c.reward_mode = RewardMode::dim_product;
    const StepResult r = search_step(flatten(p), objective, c, 0);
    Rng stream(derive_seed(c.master_seed, 0, kDeltaStreamPair));
    const auto deltas = sample_deltas(p.parameter_count(), 3, c.sigma.value(0, c.n_updates), stream);
    std::vector<std::uint64_t> seeds{derive_seed(0, 0, 0), derive_seed(0, 0, 1), derive_seed(0, 0, 2)};
    const PairResults pairs = evaluate_pairs(objective, flatten(p), deltas, seeds);
    for (std::size_t i = 0; i < 3; ++i) {
        const double d = estimate_dimension(*pairs.plus[i].trace, c.mesh).average;
        CHECK(r.record.returns_plus[i] == shaped_return(pairs.plus[i].episode_return, d, RewardMode::dim_product));
    }

    const PolicyObjective no_trace(p, make_env_factory("pendulum"), 1000, false);
    CHECK_THROWS_AS(search_step(flatten(p), no_trace, c, 0), UsageError);
}

TEST_CASE("config validation") {
    SearchConfig c;
    CHECK_NOTHROW(c.validate());
    c.n_deltas = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = SearchConfig{};
    c.alpha.end = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = SearchConfig{};
    c.reward_mode = RewardMode::dim_product;
    c.mesh.num_scales = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

}
