#pragma once

#include <cbrl/controllers/controller.hpp>

#include <array>
#include <cmath>
#include <string>
#include <string_view>

namespace cbrl::controllers {

inline constexpr std::array<std::string_view, 6> preset_names = {"linear",   "pwl2",     "pwl4",
                                                                 "pwl_sym2", "pwl_sym4", "nonlinear"};

namespace detail {

/// Index of the velocity paired with the position in state[0].
inline std::size_t velocity_index(const envs::EnvSpec& env) { return env.state_dim >= 6 ? 2 : 1; }

/// Mirror ties: region `target` copies region `source` with the weights on s0 negated and b shared.
/// With regions split on the sign of s0 this makes the control depend on |s0|.
inline void add_mirror_ties(ControllerSpec& spec, std::size_t source, std::size_t target) {
    for (std::size_t i = 0; i < spec.input_dim(); ++i)
        for (std::size_t k = 0; k < spec.control_dim; ++k)
            spec.ties.push_back({spec.w_index(source, i, k), spec.w_index(target, i, k), i == 0 ? -1.0 : 1.0});
    for (std::size_t k = 0; k < spec.control_dim; ++k)
        spec.ties.push_back({spec.b_index(source, k), spec.b_index(target, k), 1.0});
}

/// Half-width of each finite state range, 1 for unbounded dimensions.
inline std::vector<double> state_scale(const envs::EnvSpec& env) {
    std::vector<double> c;
    for (const auto& b : env.state_bounds)
        c.push_back(std::isfinite(b.low) && std::isfinite(b.high) ? 0.5 * (b.high - b.low) : 1.0);
    return c;
}

}  // namespace detail

/// Named controller layouts for an environment:
///   linear     u = W^T s + b
///   pwl2/pwl4  independent affine maps on sign(s0) / sign(s0) x sign(velocity)
///   pwl_sym2   pwl2 with region 1 mirroring region 0 (weights on s0 negated, b shared)
///   pwl_sym4   pwl4 with regions 3<-0 and 2<-1 mirrored the same way
///   nonlinear  linear plus quadratic features: s0^2 for the lander, all
///              degree-2 monomials elsewhere
/// Inputs are divided by the half-width of each finite state range.
inline ControllerSpec make_preset(std::string_view name, const envs::EnvSpec& env) {
    ControllerSpec spec;
    spec.state_dim = env.state_dim;
    spec.control_dim = env.control_dim;
    spec.input_scale = detail::state_scale(env);
    using K = PartitionRule::Kind;
    const std::size_t v = detail::velocity_index(env);

    if (name == "linear") {
        spec.family = Family::linear;
    } else if (name == "pwl2" || name == "pwl_sym2") {
        spec.family = Family::pwl;
        spec.partition = {K::sign, 0, 0};
        if (name == "pwl_sym2") detail::add_mirror_ties(spec, 0, 1);
    } else if (name == "pwl4" || name == "pwl_sym4") {
        spec.family = Family::pwl;
        spec.partition = {K::sign_by_sign, 0, v};
        if (name == "pwl_sym4") {
            detail::add_mirror_ties(spec, 0, 3);
            detail::add_mirror_ties(spec, 1, 2);
        }
    } else if (name == "nonlinear") {
        spec.family = Family::nonlinear;
        if (env.layout == envs::ActionLayout::lander_thrusters) {
            spec.features.push_back({0, 0});
        } else {
            for (std::size_t i = 0; i < env.state_dim; ++i)
                for (std::size_t j = i; j < env.state_dim; ++j) spec.features.push_back({i, j});
        }
    } else {
        throw ConfigError("unknown controller '" + std::string(name) + "'");
    }
    spec.validate();
    return spec;
}

}  // namespace cbrl::controllers
