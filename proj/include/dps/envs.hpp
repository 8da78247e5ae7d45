#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dps/policy.hpp"
#include "dps/random.hpp"

namespace dps {

/// Sign structure of an environment's returns; decides which dimension
/// shaping applies (ratio for positive, product for negative).
enum class RewardSign { positive_returns, negative_returns, mixed };

struct EnvSpec {
    std::string name;
    std::size_t obs_dim = 0;
    std::size_t act_dim = 0;
    std::size_t max_steps = 1;
    RewardSign reward_sign = RewardSign::mixed;
    Vector action_low;
    Vector action_high;
};

struct EnvStep {
    Vector observation;
    double reward = 0.0;
    bool terminated_early = false;  // implies done
    bool done = false;
};

/// Episode contract shared by every environment.
///
/// reset() draws the initial condition from a generator seeded with `seed` and
/// nothing else; step() clamps the action to the legal range, advances one
/// timestep, and marks the episode done at max_steps. Stepping a finished
/// episode throws UsageError.
class Environment {
public:
    virtual ~Environment() = default;

    virtual const EnvSpec& spec() const = 0;

    Vector reset(std::uint64_t seed);
    EnvStep step(std::span<const double> action);

    std::size_t steps_taken() const { return steps_; }
    bool done() const { return done_; }

protected:
    virtual Vector initialize(Rng& rng) = 0;
    /// `action` is already clamped. Implementations fill observation, reward and
    /// their own terminal flags; the base class handles the step limit.
    virtual EnvStep advance(std::span<const double> action) = 0;

    /// Lets tests and tools place the state directly.
    void begin_episode_from_state() {
        steps_ = 0;
        done_ = false;
    }

private:
    std::size_t steps_ = 0;
    bool done_ = true;
};

/// Continuous mountain car. Reward -0.1 a^2 per step, +100 on reaching pos >= 0.45.
class MountainCar final : public Environment {
public:
    static const EnvSpec& static_spec();
    const EnvSpec& spec() const override { return static_spec(); }

    void set_state(double position, double velocity);
    double position() const { return pos_; }
    double velocity() const { return vel_; }

protected:
    Vector initialize(Rng& rng) override;
    EnvStep advance(std::span<const double> action) override;

private:
    Vector observe() const { return {pos_, vel_}; }
    double pos_ = 0.0;
    double vel_ = 0.0;
};

/// Torque-limited pendulum swing-up, observed as (cos th, sin th, th_dot). th = 0 is upright.
class PendulumSwingUp final : public Environment {
public:
    static const EnvSpec& static_spec();
    const EnvSpec& spec() const override { return static_spec(); }

    void set_state(double theta, double theta_dot);
    double theta() const { return theta_; }
    double theta_dot() const { return theta_dot_; }

protected:
    Vector initialize(Rng& rng) override;
    EnvStep advance(std::span<const double> action) override;

private:
    Vector observe() const;
    double theta_ = 0.0;
    double theta_dot_ = 0.0;
};

/// Point mass in a corridor |y| <= 1, rewarded for forward progress. Leaving
/// the corridor terminates the episode early.
class CorridorWalker final : public Environment {
public:
    static const EnvSpec& static_spec();
    const EnvSpec& spec() const override { return static_spec(); }

    void set_state(double x, double y, double vx, double vy);

protected:
    Vector initialize(Rng& rng) override;
    EnvStep advance(std::span<const double> action) override;

private:
    Vector observe() const { return {x_, y_, vx_, vy_}; }
    double x_ = 0.0;
    double y_ = 0.0;
    double vx_ = 0.0;
    double vy_ = 0.0;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

/// Names: "mountain_car", "pendulum", "corridor". Throws ConfigError otherwise.
EnvFactory make_env_factory(std::string_view name);
const EnvSpec& env_spec_by_name(std::string_view name);
std::vector<std::string> env_names();

std::string to_string(RewardSign sign);

}  // namespace dps
