#pragma once

#include <cbrl/envs/environment.hpp>
#include <cbrl/random.hpp>

#include <cmath>
#include <numbers>
#include <random>

namespace cbrl::envs {

struct CartPoleParams {
    double gravity = 9.8;
    double masscart = 1.0;
    double masspole = 0.1;
    double half_length = 0.5;
    double force_mag = 10.0;
    double tau = 0.02;
    double theta_threshold = 12.0 * 2.0 * std::numbers::pi / 360.0;
    double x_threshold = 2.4;
    double init_range = 0.05;
    double max_steps = 200;

    static CartPoleParams with(const ParamOverrides& overrides) {
        CartPoleParams p;
        detail::apply_overrides("cartpole", overrides,
                                {{"gravity", &p.gravity},
                                 {"masscart", &p.masscart},
                                 {"masspole", &p.masspole},
                                 {"half_length", &p.half_length},
                                 {"force_mag", &p.force_mag},
                                 {"tau", &p.tau},
                                 {"theta_threshold", &p.theta_threshold},
                                 {"x_threshold", &p.x_threshold},
                                 {"init_range", &p.init_range},
                                 {"max_steps", &p.max_steps}});
        return p;
    }
};

/// Pole balanced on a cart (Barto, Sutton & Anderson). State (x, x_dot, theta, theta_dot);
/// actions push left / push right; +1 per step including the failing one.
class CartPole final : public Environment {
public:
    explicit CartPole(CartPoleParams params = {}) : p_(params) {
        spec_.name = "cartpole";
        spec_.state_dim = 4;
        spec_.state_bounds = {{-p_.x_threshold, p_.x_threshold},
                              {-detail::unbounded, detail::unbounded},
                              {-p_.theta_threshold, p_.theta_threshold},
                              {-detail::unbounded, detail::unbounded}};
        spec_.n_actions = 2;
        spec_.control_dim = 1;
        spec_.max_steps = static_cast<int>(p_.max_steps);
        spec_.layout = ActionLayout::push_left_right;
        spec_.validate();
    }

    const EnvSpec& spec() const noexcept override { return spec_; }
    const CartPoleParams& params() const noexcept { return p_; }

    StateVector reset(std::uint64_t seed) const override {
        Rng rng(seed);
        std::uniform_real_distribution<double> u(-p_.init_range, p_.init_range);
        StateVector s(4);
        for (auto& v : s) v = u(rng);
        return s;
    }

    StepFeedback advance(std::span<double> s, std::size_t action) const override {
        check_action(action);
        const double x = s[0], x_dot = s[1], theta = s[2], theta_dot = s[3];
        const double force = action == 1 ? p_.force_mag : -p_.force_mag;
        const double total_mass = p_.masscart + p_.masspole;
        const double polemass_length = p_.masspole * p_.half_length;
        const double cos_t = std::cos(theta), sin_t = std::sin(theta);
        const double temp = (force + polemass_length * theta_dot * theta_dot * sin_t) / total_mass;
        const double theta_acc = (p_.gravity * sin_t - cos_t * temp) /
                                 (p_.half_length * (4.0 / 3.0 - p_.masspole * cos_t * cos_t / total_mass));
        const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;

        s[0] = x + p_.tau * x_dot;
        s[1] = x_dot + p_.tau * x_acc;
        s[2] = theta + p_.tau * theta_dot;
        s[3] = theta_dot + p_.tau * theta_acc;

        const bool done = s[0] < -p_.x_threshold || s[0] > p_.x_threshold || s[2] < -p_.theta_threshold ||
                          s[2] > p_.theta_threshold;
        return {1.0, done};
    }

private:
    CartPoleParams p_;
    EnvSpec spec_;
};

}  // namespace cbrl::envs
