#pragma once

#include <cbrl/error.hpp>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cbrl::mdp {

/// Finite discounted MDP (X, A, P, r, gamma).
///
/// P and r are stored row-major over (state, action, next_state). Rewards are
/// attached to transitions, so the expected one-step reward of (x, a) is
/// sum_y P(x,a,y) r(x,a,y).
class DiscreteMdp {
public:
    static constexpr double default_row_tolerance = 1e-12;

    DiscreteMdp(std::size_t n_states, std::size_t n_actions, std::vector<double> transitions,
                std::vector<double> rewards, double gamma,
                double row_tolerance = default_row_tolerance)
        : n_states_(n_states),
          n_actions_(n_actions),
          p_(std::move(transitions)),
          r_(std::move(rewards)),
          gamma_(gamma) {
        if (n_states_ == 0 || n_actions_ == 0)
            throw ConfigError("DiscreteMdp: state and action counts must be positive");
        const std::size_t expected = n_states_ * n_actions_ * n_states_;
        if (p_.size() != expected || r_.size() != expected)
            throw ConfigError("DiscreteMdp: P and r must have n_states*n_actions*n_states entries");
        if (!(gamma_ >= 0.0 && gamma_ < 1.0))
            throw ConfigError("DiscreteMdp: gamma must lie in [0, 1)");
        for (std::size_t x = 0; x < n_states_; ++x) {
            for (std::size_t a = 0; a < n_actions_; ++a) {
                double sum = 0.0;
                for (std::size_t y = 0; y < n_states_; ++y) {
                    const double p = p_[index(x, a, y)];
                    if (!(p >= 0.0 && p <= 1.0))
                        throw ConfigError("DiscreteMdp: transition probability outside [0, 1]");
                    if (!std::isfinite(r_[index(x, a, y)]))
                        throw ConfigError("DiscreteMdp: non-finite reward");
                    sum += p;
                }
                if (std::abs(sum - 1.0) > row_tolerance)
                    throw ConfigError("DiscreteMdp: transition row (" + std::to_string(x) + ", " +
                                      std::to_string(a) + ") sums to " + std::to_string(sum));
            }
        }
    }

    std::size_t n_states() const noexcept { return n_states_; }
    std::size_t n_actions() const noexcept { return n_actions_; }
    double gamma() const noexcept { return gamma_; }

    double p(std::size_t x, std::size_t a, std::size_t y) const { return p_[index(x, a, y)]; }
    double r(std::size_t x, std::size_t a, std::size_t y) const { return r_[index(x, a, y)]; }

    std::span<const double> p_row(std::size_t x, std::size_t a) const {
        return {p_.data() + index(x, a, 0), n_states_};
    }
    std::span<const double> r_row(std::size_t x, std::size_t a) const {
        return {r_.data() + index(x, a, 0), n_states_};
    }

    double expected_reward(std::size_t x, std::size_t a) const {
        double total = 0.0;
        const auto p = p_row(x, a);
        const auto r = r_row(x, a);
        for (std::size_t y = 0; y < n_states_; ++y) total += p[y] * r[y];
        return total;
    }

    const std::vector<double>& transitions() const noexcept { return p_; }
    const std::vector<double>& rewards() const noexcept { return r_; }

    DiscreteMdp with_gamma(double gamma) const {
        return DiscreteMdp(n_states_, n_actions_, p_, r_, gamma, 1e-9);
    }

    friend bool operator==(const DiscreteMdp&, const DiscreteMdp&) = default;

private:
    std::size_t index(std::size_t x, std::size_t a, std::size_t y) const noexcept {
        return (x * n_actions_ + a) * n_states_ + y;
    }

    std::size_t n_states_;
    std::size_t n_actions_;
    std::vector<double> p_;
    std::vector<double> r_;
    double gamma_;
};

}  // namespace cbrl::mdp
