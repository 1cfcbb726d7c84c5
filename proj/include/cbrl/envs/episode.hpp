#pragma once

#include <cbrl/envs/cartpole.hpp>
#include <cbrl/envs/environment.hpp>
#include <cbrl/envs/lander.hpp>
#include <cbrl/envs/mountain_car.hpp>
#include <cbrl/error.hpp>

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace cbrl::envs {

/// A state-feedback policy usable by run_episode.
template <class P>
concept Policy = requires(const P& p, std::span<const double> s) {
    { p.input_dim() } -> std::convertible_to<std::size_t>;
    { p.act(s) } -> std::convertible_to<std::size_t>;
};

struct TraceRow {
    StateVector state;
    std::size_t action;
    double reward;
};

struct EpisodeOutcome {
    double total_reward = 0.0;
    int steps = 0;
    std::optional<std::vector<TraceRow>> trace;
};

/// Reset with `seed`, then act until the environment signals done or max_steps is hit.
/// total_reward is the undiscounted score.
template <Policy P>
EpisodeOutcome run_episode(const Environment& env, const P& policy, std::uint64_t seed, bool record_trace = false) {
    const auto& spec = env.spec();
    if (policy.input_dim() != spec.state_dim)
        throw ConfigError(spec.name + ": policy input dimension " + std::to_string(policy.input_dim()) +
                          " differs from state dimension " + std::to_string(spec.state_dim));
    EpisodeOutcome out;
    if (record_trace) out.trace.emplace();
    StateVector state = env.reset(seed);
    for (int t = 0; t < spec.max_steps; ++t) {
        const std::size_t action = policy.act(state);
        if (record_trace) out.trace->push_back({state, action, 0.0});
        const auto fb = env.advance(state, action);
        out.total_reward += fb.reward;
        out.steps = t + 1;
        if (record_trace) out.trace->back().reward = fb.reward;
        if (fb.done) break;
    }
    return out;
}

/// CSV columns: step, s0..s{d-1}, action, reward.
inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace, std::size_t state_dim) {
    os << "step";
    for (std::size_t i = 0; i < state_dim; ++i) os << ",s" << i;
    os << ",action,reward\n";
    os.precision(17);
    for (std::size_t t = 0; t < trace.size(); ++t) {
        os << t;
        for (double v : trace[t].state) os << ',' << v;
        os << ',' << trace[t].action << ',' << trace[t].reward << '\n';
    }
}

/// Environment by name: "cartpole", "mountaincar" or "lander".
inline std::unique_ptr<Environment> make_environment(const std::string& name, const ParamOverrides& overrides = {}) {
    if (name == "cartpole") return std::make_unique<CartPole>(CartPoleParams::with(overrides));
    if (name == "mountaincar") return std::make_unique<MountainCar>(MountainCarParams::with(overrides));
    if (name == "lander") return std::make_unique<Lander>(LanderParams::with(overrides));
    throw ConfigError("unknown environment '" + name + "'");
}

}  // namespace cbrl::envs
