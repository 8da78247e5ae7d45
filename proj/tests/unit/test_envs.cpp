#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dps/envs.hpp"
#include "dps/errors.hpp"
#include "dps/rollout.hpp"
#include "helpers.hpp"

using namespace dps;

TEST_SUITE("envs") {

TEST_CASE("reset is a pure function of the seed") {
    for (const std::string& name : env_names()) {
        auto env = make_env_factory(name)();
        CHECK(env->reset(42) == env->reset(42));
        int differ = 0;
        for (std::uint64_t s = 0; s < 100; ++s) {
            if (env->reset(2 * s) != env->reset(2 * s + 1)) ++differ;
        }
        CHECK(differ >= 99);
    }
}

TEST_CASE("corridor initial y stays within [-0.5, 0.5]") {
    CorridorWalker env;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const Vector obs = env.reset(derive_seed(9, 0, s));
        CHECK(obs[0] == 0.0);
        CHECK(obs[1] >= -0.5);
        CHECK(obs[1] <= 0.5);
        CHECK(obs[2] == 0.0);
        CHECK(obs[3] == 0.0);
    }
}

TEST_CASE("mountain car step matches the closed-form update") {
    MountainCar env;
    env.set_state(-0.5, 0.0);
    const EnvStep s = env.step(Vector{0.0});
    CHECK(s.observation[1] == doctest::Approx(-0.00017684300416925727).epsilon(1e-14));
    CHECK(s.observation[0] == doctest::Approx(-0.5001768430041692).epsilon(1e-15));
    CHECK(s.reward == 0.0);
    CHECK_FALSE(s.done);
}

TEST_CASE("mountain car goal bonus ends the episode without counting as failure") {
    MountainCar env;
    env.set_state(0.44, 0.07);
    const EnvStep s = env.step(Vector{1.0});
    CHECK(s.done);
    CHECK_FALSE(s.terminated_early);
    CHECK(s.reward == doctest::Approx(100.0 - 0.1));
}

TEST_CASE("mountain car clamps velocity and position") {
    MountainCar env;
    env.set_state(-1.19, -0.07);
    const EnvStep s = env.step(Vector{-5.0});  // action clamped to -1
    CHECK(s.observation[0] == -1.2);
    CHECK(s.observation[1] >= -0.07);
    CHECK(s.reward == doctest::Approx(-0.1));

    env.set_state(0.0, -0.0699);
    CHECK(env.step(Vector{-1.0}).observation[1] == -0.07);
}

TEST_CASE("pendulum upright and still costs nothing") {
    PendulumSwingUp env;
    env.set_state(0.0, 0.0);
    const EnvStep s = env.step(Vector{0.0});
    CHECK(s.reward == 0.0);
    CHECK(s.observation == Vector{1.0, 0.0, 0.0});
}

TEST_CASE("pendulum one step by hand") {
    PendulumSwingUp env;
    env.set_state(std::numbers::pi / 2, 0.0);
    const EnvStep s = env.step(Vector{1.0});
    CHECK(s.reward == doctest::Approx(-2.4684011002723394).epsilon(1e-14));
    CHECK(env.theta_dot() == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(env.theta() == doctest::Approx(1.6157963267948965).epsilon(1e-14));
}

TEST_CASE("wrap_angle lands in (-pi, pi]") {
    CHECK(wrap_angle(std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(wrap_angle(3 * std::numbers::pi / 2) == doctest::Approx(-std::numbers::pi / 2));
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> any(-100.0, 100.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = any(gen);
        const double w = wrap_angle(a);
        CHECK(w > -std::numbers::pi);
        CHECK(w <= std::numbers::pi);
        CHECK(std::cos(w) == doctest::Approx(std::cos(a)).epsilon(1e-9));
    }
}

TEST_CASE("corridor leaves the corridor -> early termination") {
    CorridorWalker env;
    env.set_state(0.0, 1.15, 0.0, 0.5);
    const EnvStep s = env.step(Vector{0.0, 0.0});  // y -> 1.2
    CHECK(s.terminated_early);
    CHECK(s.done);
    CHECK_THROWS_AS(env.step(Vector{0.0, 0.0}), UsageError);
}

TEST_CASE("corridor reward is the x progress") {
    CorridorWalker env;
    env.set_state(1.0, 0.0, 0.5, 0.0);
    const EnvStep s = env.step(Vector{1.0, 0.0});
    // vx = 0.6, x = 1.06
    CHECK(s.reward == doctest::Approx(0.06).epsilon(1e-12));
    CHECK_FALSE(s.terminated_early);
}

TEST_CASE("episodes end at max_steps") {
    for (const std::string& name : env_names()) {
        auto env = make_env_factory(name)();
        env->reset(1);
        const Vector idle(env->spec().act_dim, 0.0);
        std::size_t steps = 0;
        while (!env->done()) {
            env->step(idle);
            ++steps;
        }
        CHECK(steps <= env->spec().max_steps);
        if (name != "mountain_car") CHECK(steps == env->spec().max_steps);
    }
}

TEST_CASE("action length is checked") {
    CorridorWalker env;
    env.reset(0);
    CHECK_THROWS_AS(env.step(Vector{0.0}), DimensionError);
}

TEST_CASE("same seed and actions give identical reward sequences") {
    for (const std::string& name : env_names()) {
        auto a = make_env_factory(name)();
        auto b = make_env_factory(name)();
        a->reset(77);
        b->reset(77);
        Rng actions_a(5), actions_b(5);
        while (!a->done()) {
            Vector act_a(a->spec().act_dim), act_b(b->spec().act_dim);
            for (auto& v : act_a) v = actions_a.uniform(-3.0, 3.0);
            for (auto& v : act_b) v = actions_b.uniform(-3.0, 3.0);
            const EnvStep sa = a->step(act_a);
            const EnvStep sb = b->step(act_b);
            REQUIRE(sa.reward == sb.reward);
            REQUIRE(sa.observation == sb.observation);
        }
        CHECK(b->done());
    }
}

TEST_CASE("pendulum returns are never positive under random actions") {
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        Rng acts(trial);
        PendulumSwingUp env;
        env.reset(trial);
        double ret = 0.0;
        while (!env.done()) {
            const EnvStep s = env.step(Vector{acts.uniform(-2.0, 2.0)});
            CHECK(s.reward <= 0.0);
            CHECK_FALSE(s.terminated_early);
            ret += s.reward;
        }
        CHECK(ret <= 0.0);
    }
}

TEST_CASE("mountain car never exceeds the goal bonus") {
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        Rng acts(trial);
        MountainCar env;
        env.reset(trial);
        double ret = 0.0;
        while (!env.done()) {
            const EnvStep s = env.step(Vector{acts.uniform(-1.0, 1.0)});
            CHECK_FALSE(s.terminated_early);
            if (env.position() < 0.45) CHECK(s.reward <= 0.0);
            ret += s.reward;
        }
        CHECK(ret <= 100.0);
    }
}

TEST_CASE("unknown environment name") {
    CHECK_THROWS_AS(make_env_factory("lunar_lander"), ConfigError);
    CHECK(env_spec_by_name("pendulum").reward_sign == RewardSign::negative_returns);
}

}
