#pragma once

#include <cbrl/envs/environment.hpp>
#include <cbrl/random.hpp>

#include <cmath>
#include <numbers>
#include <random>

namespace cbrl::envs {

struct LanderParams {
    double gravity = 1.0;
    double main_accel = 2.0;
    double side_accel = 0.4;
    double side_angular_accel = 1.0;
    double dt = 0.02;

    double pad_half_width = 0.2;
    double soft_vx = 0.5;
    double soft_vy = 0.5;
    double soft_angle = 0.3;
    double x_limit = 1.5;
    double y_limit = 2.5;
    double angle_limit = std::numbers::pi / 2.0;

    double landing_bonus = 100.0;
    double crash_penalty = 100.0;
    double main_cost = 0.3;
    double side_cost = 0.03;
    double distance_weight = 100.0;
    double speed_weight = 100.0;
    double angle_weight = 100.0;

    double init_x = 0.3;
    double init_y = 1.4;
    double init_vx = 0.3;
    double init_vy = 0.3;
    double init_angle = 0.05;
    double init_omega = 0.05;
    double max_steps = 1000;

    static LanderParams with(const ParamOverrides& overrides) {
        LanderParams p;
        detail::apply_overrides("lander", overrides,
                                {{"gravity", &p.gravity},
                                 {"main_accel", &p.main_accel},
                                 {"side_accel", &p.side_accel},
                                 {"side_angular_accel", &p.side_angular_accel},
                                 {"dt", &p.dt},
                                 {"pad_half_width", &p.pad_half_width},
                                 {"soft_vx", &p.soft_vx},
                                 {"soft_vy", &p.soft_vy},
                                 {"soft_angle", &p.soft_angle},
                                 {"x_limit", &p.x_limit},
                                 {"y_limit", &p.y_limit},
                                 {"angle_limit", &p.angle_limit},
                                 {"landing_bonus", &p.landing_bonus},
                                 {"crash_penalty", &p.crash_penalty},
                                 {"main_cost", &p.main_cost},
                                 {"side_cost", &p.side_cost},
                                 {"distance_weight", &p.distance_weight},
                                 {"speed_weight", &p.speed_weight},
                                 {"angle_weight", &p.angle_weight},
                                 {"init_x", &p.init_x},
                                 {"init_y", &p.init_y},
                                 {"init_vx", &p.init_vx},
                                 {"init_vy", &p.init_vy},
                                 {"init_angle", &p.init_angle},
                                 {"init_omega", &p.init_omega},
                                 {"max_steps", &p.max_steps}});
        return p;
    }
};

/// Planar lander: a rigid point mass with attitude, landing on a pad at x = 0.
///
/// State (x, y, vx, vy, theta, omega), y = 0 is the ground. Actions: 0 no-op,
/// 1 left engine (push toward -x, spin +), 2 main engine (thrust along the body
/// axis), 3 right engine (push toward +x, spin -). Explicit Euler integration.
///
/// Reward per step is the change in the shaping potential
///   -w_d |(x, y)| - w_v |(vx, vy)| - w_a |theta|
/// minus fuel (main / side engine cost). Touching the ground ends the episode:
/// a soft touchdown on the pad earns the landing bonus, a soft touchdown off
/// the pad earns nothing extra, a hard touchdown pays the crash penalty.
/// Leaving the flight box or tipping past the angle limit also pays the crash penalty.
class Lander final : public Environment {
public:
    static constexpr std::size_t noop = 0, left = 1, main = 2, right = 3;

    explicit Lander(LanderParams params = {}) : p_(params) {
        spec_.name = "lander";
        spec_.state_dim = 6;
        spec_.state_bounds = {{-p_.x_limit, p_.x_limit},
                              {0.0, p_.y_limit},
                              {-detail::unbounded, detail::unbounded},
                              {-detail::unbounded, detail::unbounded},
                              {-p_.angle_limit, p_.angle_limit},
                              {-detail::unbounded, detail::unbounded}};
        spec_.n_actions = 4;
        spec_.control_dim = 2;
        spec_.max_steps = static_cast<int>(p_.max_steps);
        spec_.layout = ActionLayout::lander_thrusters;
        spec_.validate();
    }

    const EnvSpec& spec() const noexcept override { return spec_; }
    const LanderParams& params() const noexcept { return p_; }

    StateVector reset(std::uint64_t seed) const override {
        Rng rng(seed);
        auto sym = [&](double half) { return std::uniform_real_distribution<double>(-half, half)(rng); };
        StateVector s(6);
        s[0] = sym(p_.init_x);
        s[1] = p_.init_y;
        s[2] = sym(p_.init_vx);
        s[3] = std::uniform_real_distribution<double>(-p_.init_vy, 0.0)(rng);
        s[4] = sym(p_.init_angle);
        s[5] = sym(p_.init_omega);
        return s;
    }

    double shaping(std::span<const double> s) const {
        return -p_.distance_weight * std::hypot(s[0], s[1]) - p_.speed_weight * std::hypot(s[2], s[3]) -
               p_.angle_weight * std::abs(s[4]);
    }

    StepFeedback advance(std::span<double> s, std::size_t action) const override {
        check_action(action);
        const double before = shaping(s);
        double ax = 0.0, ay = -p_.gravity, alpha = 0.0, fuel = 0.0;
        switch (action) {
            case main:
                ax += -std::sin(s[4]) * p_.main_accel;
                ay += std::cos(s[4]) * p_.main_accel;
                fuel = p_.main_cost;
                break;
            case left:
                ax -= p_.side_accel;
                alpha = p_.side_angular_accel;
                fuel = p_.side_cost;
                break;
            case right:
                ax += p_.side_accel;
                alpha = -p_.side_angular_accel;
                fuel = p_.side_cost;
                break;
            default: break;
        }
        const double dt = p_.dt;
        s[0] += dt * s[2];
        s[1] += dt * s[3];
        s[2] += dt * ax;
        s[3] += dt * ay;
        s[4] += dt * s[5];
        s[5] += dt * alpha;

        double reward = shaping(s) - before - fuel;
        if (s[1] <= 0.0) {
            s[1] = 0.0;
            const bool soft = std::abs(s[2]) < p_.soft_vx && std::abs(s[3]) < p_.soft_vy && std::abs(s[4]) < p_.soft_angle;
            if (!soft)
                reward -= p_.crash_penalty;
            else if (std::abs(s[0]) <= p_.pad_half_width)
                reward += p_.landing_bonus;
            return {reward, true};
        }
        if (std::abs(s[0]) > p_.x_limit || s[1] > p_.y_limit || std::abs(s[4]) > p_.angle_limit)
            return {reward - p_.crash_penalty, true};
        return {reward, false};
    }

private:
    LanderParams p_;
    EnvSpec spec_;
};

}  // namespace cbrl::envs
