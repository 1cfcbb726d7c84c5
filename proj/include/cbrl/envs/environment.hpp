#pragma once

#include <cbrl/error.hpp>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace cbrl::envs {

using StateVector = std::vector<double>;

struct Bounds {
    double low;
    double high;
};

/// How a discrete action index is laid out; selects the continuous-to-discrete quantizer.
enum class ActionLayout {
    push_left_right,           // 0 = left, 1 = right
    backward_neutral_forward,  // 0 = backward, 1 = neutral, 2 = forward
    lander_thrusters,          // 0 = no-op, 1 = left, 2 = main, 3 = right
};

struct EnvSpec {
    std::string name;
    std::size_t state_dim = 0;
    std::vector<Bounds> state_bounds;
    std::size_t n_actions = 0;
    std::size_t control_dim = 0;
    int max_steps = 0;
    ActionLayout layout = ActionLayout::push_left_right;

    void validate() const {
        if (state_bounds.size() != state_dim) throw ConfigError(name + ": one bound pair per state dimension required");
        for (const auto& b : state_bounds)
            if (!(b.low < b.high)) throw ConfigError(name + ": state bound with low >= high");
        if (max_steps < 1) throw ConfigError(name + ": max_steps must be at least 1");
        if (control_dim < 1) throw ConfigError(name + ": control_dim must be at least 1");
        if (n_actions < 1) throw ConfigError(name + ": n_actions must be at least 1");
    }
};

struct StepFeedback {
    double reward = 0.0;
    bool done = false;
};

struct StepResult {
    StateVector state;
    double reward = 0.0;
    bool done = false;
};

/// Physics constants overriding an environment's defaults, keyed by parameter name.
using ParamOverrides = std::map<std::string, double>;

/// A deterministic episodic environment. Instances are immutable; the episode
/// state lives with the caller, so one instance can serve many threads.
class Environment {
public:
    virtual ~Environment() = default;

    virtual const EnvSpec& spec() const noexcept = 0;

    /// Initial state drawn from the environment's start distribution using `seed`.
    virtual StateVector reset(std::uint64_t seed) const = 0;

    /// Advance `state` in place by one step under `action`.
    virtual StepFeedback advance(std::span<double> state, std::size_t action) const = 0;

    StepResult step(std::span<const double> state, std::size_t action) const {
        StepResult out{StateVector(state.begin(), state.end()), 0.0, false};
        const auto fb = advance(out.state, action);
        out.reward = fb.reward;
        out.done = fb.done;
        return out;
    }

protected:
    void check_action(std::size_t action) const {
        if (action >= spec().n_actions)
            throw ArgumentError(spec().name + ": action index " + std::to_string(action) + " out of range");
    }
};

namespace detail {
inline constexpr double unbounded = std::numeric_limits<double>::infinity();

/// Copies known keys from `overrides` into `fields`; unknown keys are a configuration error.
inline void apply_overrides(const std::string& env, const ParamOverrides& overrides,
                            const std::map<std::string, double*>& fields) {
    for (const auto& [key, value] : overrides) {
        auto it = fields.find(key);
        if (it == fields.end()) throw ConfigError(env + ": unknown parameter '" + key + "'");
        *it->second = value;
    }
}
}  // namespace detail

}  // namespace cbrl::envs
