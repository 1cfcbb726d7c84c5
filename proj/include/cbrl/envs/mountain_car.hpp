#pragma once

#include <cbrl/envs/environment.hpp>
#include <cbrl/random.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace cbrl::envs {

struct MountainCarParams {
    double force = 0.001;
    double gravity = 0.0025;
    double min_position = -1.2;
    double max_position = 0.6;
    double max_speed = 0.07;
    double goal_position = 0.5;
    double init_low = -0.6;
    double init_high = -0.4;
    double max_steps = 200;

    static MountainCarParams with(const ParamOverrides& overrides) {
        MountainCarParams p;
        detail::apply_overrides("mountaincar", overrides,
                                {{"force", &p.force},
                                 {"gravity", &p.gravity},
                                 {"min_position", &p.min_position},
                                 {"max_position", &p.max_position},
                                 {"max_speed", &p.max_speed},
                                 {"goal_position", &p.goal_position},
                                 {"init_low", &p.init_low},
                                 {"init_high", &p.init_high},
                                 {"max_steps", &p.max_steps}});
        return p;
    }
};

/// Under-powered car in a valley (Moore). State (position, velocity); actions
/// backward / neutral / forward; -1 per step until the goal position is reached.
class MountainCar final : public Environment {
public:
    explicit MountainCar(MountainCarParams params = {}) : p_(params) {
        spec_.name = "mountaincar";
        spec_.state_dim = 2;
        spec_.state_bounds = {{p_.min_position, p_.max_position}, {-p_.max_speed, p_.max_speed}};
        spec_.n_actions = 3;
        spec_.control_dim = 1;
        spec_.max_steps = static_cast<int>(p_.max_steps);
        spec_.layout = ActionLayout::backward_neutral_forward;
        spec_.validate();
    }

    const EnvSpec& spec() const noexcept override { return spec_; }
    const MountainCarParams& params() const noexcept { return p_; }

    StateVector reset(std::uint64_t seed) const override {
        Rng rng(seed);
        std::uniform_real_distribution<double> u(p_.init_low, p_.init_high);
        return {u(rng), 0.0};
    }

    StepFeedback advance(std::span<double> s, std::size_t action) const override {
        check_action(action);
        double position = s[0], velocity = s[1];
        velocity += (static_cast<double>(action) - 1.0) * p_.force - p_.gravity * std::cos(3.0 * position);
        velocity = std::clamp(velocity, -p_.max_speed, p_.max_speed);
        position += velocity;
        position = std::clamp(position, p_.min_position, p_.max_position);
        if (position == p_.min_position && velocity < 0.0) velocity = 0.0;
        s[0] = position;
        s[1] = velocity;
        return {-1.0, position >= p_.goal_position};
    }

private:
    MountainCarParams p_;
    EnvSpec spec_;
};

}  // namespace cbrl::envs
