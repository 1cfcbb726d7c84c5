#pragma once

#include <cbrl/envs/environment.hpp>
#include <cbrl/error.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cbrl::controllers {

enum class Family { linear, pwl, nonlinear };

inline std::string to_string(Family f) {
    switch (f) {
        case Family::linear: return "linear";
        case Family::pwl: return "pwl";
        case Family::nonlinear: return "nonlinear";
    }
    return "?";
}

/// How a state is assigned to a region of a piecewise-linear controller.
struct PartitionRule {
    enum class Kind {
        single,         // one region
        sign,           // region = (s[first] >= 0)
        sign_by_sign,   // region = 2 (s[first] >= 0) + (s[second] >= 0)
    };
    Kind kind = Kind::single;
    std::size_t first = 0;
    std::size_t second = 0;

    std::size_t n_regions() const noexcept {
        switch (kind) {
            case Kind::single: return 1;
            case Kind::sign: return 2;
            case Kind::sign_by_sign: return 4;
        }
        return 1;
    }

    std::size_t region(std::span<const double> s) const noexcept {
        switch (kind) {
            case Kind::single: return 0;
            case Kind::sign: return s[first] >= 0.0 ? 1 : 0;
            case Kind::sign_by_sign: return (s[first] >= 0.0 ? 2 : 0) + (s[second] >= 0.0 ? 1 : 0);
        }
        return 0;
    }
};

/// Feature s[i] * s[j] appended to the state before the affine map.
struct Monomial {
    std::size_t i = 0;
    std::size_t j = 0;
};

/// full[target] = sign * full[source], indices into the full parameter vector.
struct Tie {
    std::size_t source = 0;
    std::size_t target = 0;
    double sign = 1.0;
};

/// Region weights W_m (input_dim x control_dim) and offsets b_m.
/// The control is u = W_m^T [z; g(z)] + b_m with z = s / input_scale and m the region of s.
struct ControllerMatrices {
    std::vector<Eigen::MatrixXd> W;
    std::vector<Eigen::VectorXd> b;
};

/// Full parameter layout, per region m: W_m row-major (input-major), then b_m.
class ControllerSpec {
public:
    Family family = Family::linear;
    std::size_t state_dim = 0;
    std::size_t control_dim = 0;
    PartitionRule partition;
    std::vector<Monomial> features;
    std::vector<Tie> ties;
    std::vector<double> input_scale;  // empty: no scaling
    double bound_low = -10.0;
    double bound_high = 10.0;

    std::size_t n_regions() const noexcept { return partition.n_regions(); }
    std::size_t input_dim() const noexcept { return state_dim + features.size(); }
    std::size_t params_per_region() const noexcept { return (input_dim() + 1) * control_dim; }
    std::size_t full_length() const noexcept { return n_regions() * params_per_region(); }
    std::size_t genome_length() const noexcept { return full_length() - ties.size(); }

    std::size_t w_index(std::size_t region, std::size_t input, std::size_t out) const noexcept {
        return region * params_per_region() + input * control_dim + out;
    }
    std::size_t b_index(std::size_t region, std::size_t out) const noexcept {
        return region * params_per_region() + input_dim() * control_dim + out;
    }

    void validate() const {
        if (state_dim < 1 || control_dim < 1) throw ConfigError("controller: state_dim and control_dim must be >= 1");
        if (!(bound_low < bound_high)) throw ConfigError("controller: gene bounds need low < high");
        if (family == Family::linear && (partition.kind != PartitionRule::Kind::single || !features.empty()))
            throw ConfigError("controller: linear family has one region and no features");
        if (family != Family::nonlinear && !features.empty())
            throw ConfigError("controller: only the nonlinear family takes features");
        if (!input_scale.empty() && input_scale.size() != state_dim)
            throw ConfigError("controller: one input scale per state dimension required");
        for (double c : input_scale)
            if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("controller: input scales must be positive");
        if (partition.first >= state_dim || partition.second >= state_dim)
            throw ConfigError("controller: partition index out of range");
        for (const auto& m : features)
            if (m.i >= state_dim || m.j >= state_dim) throw ConfigError("controller: feature index out of range");
        std::vector<char> tied(full_length(), 0);
        for (const auto& t : ties) {
            if (t.source >= full_length() || t.target >= full_length())
                throw ConfigError("controller: tie index out of range");
            if (tied[t.target]) throw ConfigError("controller: parameter tied twice");
            tied[t.target] = 1;
        }
        for (const auto& t : ties)
            if (tied[t.source]) throw ConfigError("controller: tie source must be a free parameter");
    }

    /// Indices of the full parameter vector that are free genes, in genome order.
    std::vector<std::size_t> free_indices() const {
        std::vector<char> tied(full_length(), 0);
        for (const auto& t : ties) tied[t.target] = 1;
        std::vector<std::size_t> out;
        out.reserve(genome_length());
        for (std::size_t k = 0; k < full_length(); ++k)
            if (!tied[k]) out.push_back(k);
        return out;
    }

    std::vector<double> lower_bounds() const { return std::vector<double>(genome_length(), bound_low); }
    std::vector<double> upper_bounds() const { return std::vector<double>(genome_length(), bound_high); }
};

/// Full parameter vector with every tie resolved.
inline std::vector<double> expand(const ControllerSpec& spec, std::span<const double> genome) {
    if (genome.size() != spec.genome_length())
        throw ArgumentError("controller: genome length " + std::to_string(genome.size()) + ", expected " +
                            std::to_string(spec.genome_length()));
    std::vector<double> full(spec.full_length(), 0.0);
    const auto free = spec.free_indices();
    for (std::size_t g = 0; g < free.size(); ++g) full[free[g]] = genome[g];
    for (const auto& t : spec.ties) full[t.target] = t.sign * full[t.source];
    return full;
}

inline ControllerMatrices decode(const ControllerSpec& spec, std::span<const double> genome) {
    const auto full = expand(spec, genome);
    ControllerMatrices m;
    for (std::size_t r = 0; r < spec.n_regions(); ++r) {
        Eigen::MatrixXd W(spec.input_dim(), spec.control_dim);
        Eigen::VectorXd b(spec.control_dim);
        for (std::size_t i = 0; i < spec.input_dim(); ++i)
            for (std::size_t k = 0; k < spec.control_dim; ++k) W(i, k) = full[spec.w_index(r, i, k)];
        for (std::size_t k = 0; k < spec.control_dim; ++k) b(k) = full[spec.b_index(r, k)];
        m.W.push_back(std::move(W));
        m.b.push_back(std::move(b));
    }
    return m;
}

/// Genome holding the free entries of `m`; tied entries of `m` are ignored.
inline std::vector<double> encode(const ControllerSpec& spec, const ControllerMatrices& m) {
    if (m.W.size() != spec.n_regions() || m.b.size() != spec.n_regions())
        throw ArgumentError("controller: expected " + std::to_string(spec.n_regions()) + " regions");
    std::vector<double> full(spec.full_length());
    for (std::size_t r = 0; r < spec.n_regions(); ++r) {
        if (static_cast<std::size_t>(m.W[r].rows()) != spec.input_dim() ||
            static_cast<std::size_t>(m.W[r].cols()) != spec.control_dim ||
            static_cast<std::size_t>(m.b[r].size()) != spec.control_dim)
            throw ArgumentError("controller: matrix shape mismatch in region " + std::to_string(r));
        for (std::size_t i = 0; i < spec.input_dim(); ++i)
            for (std::size_t k = 0; k < spec.control_dim; ++k) full[spec.w_index(r, i, k)] = m.W[r](i, k);
        for (std::size_t k = 0; k < spec.control_dim; ++k) full[spec.b_index(r, k)] = m.b[r](k);
    }
    std::vector<double> genome;
    genome.reserve(spec.genome_length());
    for (auto k : spec.free_indices()) genome.push_back(full[k]);
    return genome;
}

/// Evaluate u = W_m^T [s; g(s)] + b_m on an expanded parameter vector; writes control_dim values.
inline void act_continuous_full(const ControllerSpec& spec, std::span<const double> full,
                                std::span<const double> state, std::span<double> u) {
    const std::size_t r = spec.partition.region(state);
    const std::size_t cd = spec.control_dim;
    double zbuf[16];
    std::vector<double> zheap;
    if (!spec.input_scale.empty()) {
        double* z = zbuf;
        if (state.size() > 16) {
            zheap.resize(state.size());
            z = zheap.data();
        }
        for (std::size_t i = 0; i < spec.state_dim; ++i) z[i] = state[i] / spec.input_scale[i];
        state = std::span<const double>(z, spec.state_dim);
    }
    for (std::size_t k = 0; k < cd; ++k) u[k] = full[spec.b_index(r, k)];
    const double* w = full.data() + r * spec.params_per_region();
    for (std::size_t i = 0; i < spec.state_dim; ++i, w += cd)
        for (std::size_t k = 0; k < cd; ++k) u[k] += w[k] * state[i];
    for (const auto& f : spec.features) {
        const double g = state[f.i] * state[f.j];
        for (std::size_t k = 0; k < cd; ++k) u[k] += w[k] * g;
        w += cd;
    }
}

inline std::vector<double> act_continuous(const ControllerSpec& spec, std::span<const double> genome,
                                          std::span<const double> state) {
    if (state.size() != spec.state_dim) throw ConfigError("controller: state dimension mismatch");
    const auto full = expand(spec, genome);
    std::vector<double> u(spec.control_dim);
    act_continuous_full(spec, full, state, u);
    return u;
}

/// Thresholds of the continuous-to-discrete map. `tau` serves one-dimensional
/// controls; the lander uses `vertical` and `lateral`.
struct QuantizerThresholds {
    double tau = 0.0;
    double vertical = 0.0;
    double lateral = 0.0;
};

inline std::size_t quantize_action(const envs::EnvSpec& env, std::span<const double> u,
                                   const QuantizerThresholds& th = {}) {
    if (u.size() != env.control_dim)
        throw ConfigError(env.name + ": control vector of length " + std::to_string(u.size()) + ", expected " +
                          std::to_string(env.control_dim));
    switch (env.layout) {
        case envs::ActionLayout::push_left_right: return u[0] >= th.tau ? 1 : 0;
        case envs::ActionLayout::backward_neutral_forward:
            if (u[0] < -th.tau) return 0;
            if (u[0] > th.tau) return 2;
            return 1;
        case envs::ActionLayout::lander_thrusters:
            if (u[1] > th.vertical) return 2;
            if (std::abs(u[0]) > th.lateral) return u[0] < 0.0 ? 1 : 3;
            return 0;
    }
    return 0;
}

/// A frozen controller acting on one environment; satisfies envs::Policy.
class ControlPolicy {
public:
    ControlPolicy(ControllerSpec spec, std::span<const double> genome, const envs::EnvSpec& env,
                  QuantizerThresholds thresholds = {})
        : spec_(std::move(spec)), full_(expand(spec_, genome)), env_(env), th_(thresholds) {
        if (spec_.control_dim != env.control_dim)
            throw ConfigError(env.name + ": controller control_dim " + std::to_string(spec_.control_dim) +
                              " differs from environment control_dim " + std::to_string(env.control_dim));
    }

    std::size_t input_dim() const noexcept { return spec_.state_dim; }

    std::size_t act(std::span<const double> state) const {
        double buf[8];
        std::vector<double> heap;
        std::span<double> u;
        if (spec_.control_dim <= 8) {
            u = std::span<double>(buf, spec_.control_dim);
        } else {
            heap.resize(spec_.control_dim);
            u = heap;
        }
        act_continuous_full(spec_, full_, state, u);
        return quantize_action(env_, u, th_);
    }

    const ControllerSpec& spec() const noexcept { return spec_; }

private:
    ControllerSpec spec_;
    std::vector<double> full_;
    envs::EnvSpec env_;
    QuantizerThresholds th_;
};

}  // namespace cbrl::controllers
