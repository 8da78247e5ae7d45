#include "dps/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dps/errors.hpp"

namespace dps {

Vector Environment::reset(std::uint64_t seed) {
    Rng rng(seed);
    steps_ = 0;
    done_ = false;
    return initialize(rng);
}

EnvStep Environment::step(std::span<const double> action) {
    if (done_) {
        throw UsageError("step() called on a finished episode of " + spec().name + "; call reset() first");
    }
    const EnvSpec& s = spec();
    if (action.size() != s.act_dim) {
        throw DimensionError(s.name + " action", s.act_dim, action.size());
    }
    Vector clamped(action.begin(), action.end());
    for (std::size_t j = 0; j < clamped.size(); ++j) {
        if (std::isnan(clamped[j])) throw InvalidArgument(s.name + " action is NaN");
        clamped[j] = std::clamp(clamped[j], s.action_low[j], s.action_high[j]);
    }
    EnvStep result = advance(clamped);
    ++steps_;
    if (steps_ >= s.max_steps) result.done = true;
    if (result.terminated_early) result.done = true;
    done_ = result.done;
    return result;
}

// --- MountainCar -----------------------------------------------------------

const EnvSpec& MountainCar::static_spec() {
    static const EnvSpec spec{"mountain_car", 2, 1, 999, RewardSign::positive_returns, {-1.0}, {1.0}};
    return spec;
}

void MountainCar::set_state(double position, double velocity) {
    pos_ = position;
    vel_ = velocity;
    begin_episode_from_state();
}

Vector MountainCar::initialize(Rng& rng) {
    pos_ = rng.uniform(-0.6, -0.4);
    vel_ = 0.0;
    return observe();
}

EnvStep MountainCar::advance(std::span<const double> action) {
    const double a = action[0];
    vel_ = std::clamp(vel_ + 0.0015 * a - 0.0025 * std::cos(3.0 * pos_), -0.07, 0.07);
    pos_ = std::clamp(pos_ + vel_, -1.2, 0.6);
    EnvStep out;
    out.reward = -0.1 * a * a;
    if (pos_ >= 0.45) {
        out.reward += 100.0;
        out.done = true;
    }
    out.observation = observe();
    return out;
}

// --- PendulumSwingUp -------------------------------------------------------

namespace {
constexpr double kGravity = 10.0;
constexpr double kMass = 1.0;
constexpr double kLength = 1.0;
constexpr double kDt = 0.05;
constexpr double kMaxSpeed = 8.0;
}  // namespace

double wrap_angle(double angle) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double wrapped = std::fmod(angle + std::numbers::pi, two_pi);
    if (wrapped < 0.0) wrapped += two_pi;
    // wrapped in [0, 2pi) -> [-pi, pi); move the -pi end over to +pi.
    wrapped -= std::numbers::pi;
    return wrapped <= -std::numbers::pi ? std::numbers::pi : wrapped;
}

const EnvSpec& PendulumSwingUp::static_spec() {
    static const EnvSpec spec{"pendulum", 3, 1, 200, RewardSign::negative_returns, {-2.0}, {2.0}};
    return spec;
}

void PendulumSwingUp::set_state(double theta, double theta_dot) {
    theta_ = theta;
    theta_dot_ = theta_dot;
    begin_episode_from_state();
}

Vector PendulumSwingUp::observe() const { return {std::cos(theta_), std::sin(theta_), theta_dot_}; }

Vector PendulumSwingUp::initialize(Rng& rng) {
    theta_ = rng.uniform(-std::numbers::pi, std::numbers::pi);
    theta_dot_ = rng.uniform(-1.0, 1.0);
    return observe();
}

EnvStep PendulumSwingUp::advance(std::span<const double> action) {
    const double u = action[0];
    const double th = wrap_angle(theta_);
    EnvStep out;
    // Cost is charged on the state the action was taken from.
    out.reward = -(th * th + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u);

    const double accel = 3.0 * kGravity / (2.0 * kLength) * std::sin(theta_) + 3.0 / (kMass * kLength * kLength) * u;
    theta_dot_ = std::clamp(theta_dot_ + accel * kDt, -kMaxSpeed, kMaxSpeed);
    theta_ = theta_ + theta_dot_ * kDt;
    out.observation = observe();
    return out;
}

// --- CorridorWalker --------------------------------------------------------

const EnvSpec& CorridorWalker::static_spec() {
    static const EnvSpec spec{"corridor", 4, 2, 200, RewardSign::positive_returns, {-1.0, -1.0}, {1.0, 1.0}};
    return spec;
}

void CorridorWalker::set_state(double x, double y, double vx, double vy) {
    x_ = x;
    y_ = y;
    vx_ = vx;
    vy_ = vy;
    begin_episode_from_state();
}

Vector CorridorWalker::initialize(Rng& rng) {
    x_ = 0.0;
    vx_ = 0.0;
    vy_ = 0.0;
    y_ = rng.uniform(-0.5, 0.5);
    return observe();
}

EnvStep CorridorWalker::advance(std::span<const double> action) {
    const double x_before = x_;
    vx_ += 0.1 * action[0];
    vy_ += 0.1 * action[1];
    x_ += 0.1 * vx_;
    y_ += 0.1 * vy_;
    EnvStep out;
    out.reward = x_ - x_before;
    out.terminated_early = std::abs(y_) > 1.0;
    out.done = out.terminated_early;
    out.observation = observe();
    return out;
}

// --- registry --------------------------------------------------------------

EnvFactory make_env_factory(std::string_view name) {
    if (name == "mountain_car") return [] { return std::make_unique<MountainCar>(); };
    if (name == "pendulum") return [] { return std::make_unique<PendulumSwingUp>(); };
    if (name == "corridor") return [] { return std::make_unique<CorridorWalker>(); };
    throw ConfigError("unknown environment \"" + std::string(name) + "\" (expected mountain_car, pendulum or corridor)");
}

const EnvSpec& env_spec_by_name(std::string_view name) {
    if (name == "mountain_car") return MountainCar::static_spec();
    if (name == "pendulum") return PendulumSwingUp::static_spec();
    if (name == "corridor") return CorridorWalker::static_spec();
    throw ConfigError("unknown environment \"" + std::string(name) + "\" (expected mountain_car, pendulum or corridor)");
}

std::vector<std::string> env_names() { return {"mountain_car", "pendulum", "corridor"}; }

std::string to_string(RewardSign sign) {
    switch (sign) {
        case RewardSign::positive_returns: return "positive_returns";
        case RewardSign::negative_returns: return "negative_returns";
        case RewardSign::mixed: return "mixed";
    }
    return "mixed";
}

}  // namespace dps
