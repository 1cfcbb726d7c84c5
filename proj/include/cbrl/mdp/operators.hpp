#pragma once

#include <cbrl/error.hpp>
#include <cbrl/mdp/discrete_mdp.hpp>
#include <cbrl/mdp/neighborhood.hpp>
#include <cbrl/mdp/policy_family.hpp>

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

namespace cbrl::mdp {

/// N_nu q^F(x, c): max, min or weighted average of column c over nu(x).
inline double apply_neighborhood(const FamilyQFunction& q, std::size_t x, std::size_t c, const NeighborhoodMap& map) {
    if (map.n_states() != q.n_states()) throw ConfigError("apply_neighborhood: map and q disagree on n_states");
    if (x >= q.n_states() || c >= q.n_policies()) throw ConfigError("apply_neighborhood: index out of range");
    const auto& hood = map.neighbors(x);
    if (hood.size() == 1) return q(hood.front(), c);
    switch (map.kind()) {
        case NeighborhoodKind::max: {
            double v = -std::numeric_limits<double>::infinity();
            for (auto y : hood) v = std::max(v, q(y, c));
            return v;
        }
        case NeighborhoodKind::min: {
            double v = std::numeric_limits<double>::infinity();
            for (auto y : hood) v = std::min(v, q(y, c));
            return v;
        }
        case NeighborhoodKind::average: {
            const auto& w = map.weights(x);
            double v = 0.0;
            for (std::size_t i = 0; i < hood.size(); ++i) v += w[i] * q(hood[i], c);
            return v;
        }
    }
    return 0.0;
}

/// sup_D N_nu q^F(y, D), the continuation value at y.
inline double best_neighborhood_value(const FamilyQFunction& q, std::size_t y, const NeighborhoodMap& map) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < q.n_policies(); ++d) best = std::max(best, apply_neighborhood(q, y, d, map));
    return best;
}

/// Lowest-index policy attaining sup_D N_nu q^F(x, D).
inline std::size_t greedy_policy_index(const FamilyQFunction& q, std::size_t x, const NeighborhoodMap& map) {
    std::size_t arg = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < q.n_policies(); ++d) {
        const double v = apply_neighborhood(q, x, d, map);
        if (v > best) {
            best = v;
            arg = d;
        }
    }
    return arg;
}

/// V(x) = sup_C N_nu q^F(x, C) for every state.
inline std::vector<double> neighborhood_values(const FamilyQFunction& q, const NeighborhoodMap& map) {
    std::vector<double> v(q.n_states());
    for (std::size_t x = 0; x < v.size(); ++x) v[x] = best_neighborhood_value(q, x, map);
    return v;
}

namespace detail {
inline void check_dimensions(const FamilyQFunction& q, const DiscreteMdp& mdp, const PolicyFamily& family,
                             const NeighborhoodMap& map) {
    if (q.n_states() != mdp.n_states() || family.n_states() != mdp.n_states() || map.n_states() != mdp.n_states())
        throw ConfigError("T_nu: state counts of q, MDP, family and neighborhood map differ");
    if (q.n_policies() != family.size()) throw ConfigError("T_nu: q columns differ from family size");
    if (family.n_actions() != mdp.n_actions()) throw ConfigError("T_nu: family and MDP disagree on n_actions");
}
}  // namespace detail

/// (T_nu q)(x, C) = sum_y P_{C(x)}(x, y) [r(x, C(x), y) + gamma sup_D N_nu q(y, D)].
inline FamilyQFunction bellman_t_nu(const FamilyQFunction& q, const DiscreteMdp& mdp, const PolicyFamily& family,
                                    const NeighborhoodMap& map) {
    detail::check_dimensions(q, mdp, family, map);
    const std::size_t n = mdp.n_states();
    const auto cont = neighborhood_values(q, map);
    FamilyQFunction out(n, family.size());
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t c = 0; c < family.size(); ++c) {
            const std::size_t a = family.action(c, x);
            const auto p = mdp.p_row(x, a);
            const auto r = mdp.r_row(x, a);
            double v = 0.0;
            for (std::size_t y = 0; y < n; ++y)
                if (p[y] != 0.0) v += p[y] * (r[y] + mdp.gamma() * cont[y]);
            out(x, c) = v;
        }
    }
    return out;
}

struct FixedPointOptions {
    double tol = 1e-9;
    long max_iters = 100000;
};

struct FixedPointResult {
    FamilyQFunction q;
    long iterations = 0;
    /// ||T q - q||_inf of the returned table.
    double residual = 0.0;
    /// ||q_{k+1} - q_k||_inf for every iteration k.
    std::vector<double> deltas;
};

/// Iterates T_nu from the zero table until successive iterates differ by less than tol.
inline FixedPointResult fixed_point(const DiscreteMdp& mdp, const PolicyFamily& family, const NeighborhoodMap& map,
                                    FixedPointOptions options = {}) {
    if (!(options.tol > 0.0)) throw ArgumentError("fixed_point: tol must be positive");
    if (options.max_iters < 1) throw ArgumentError("fixed_point: max_iters must be at least 1");
    FixedPointResult result{FamilyQFunction(mdp.n_states(), family.size()), 0, 0.0, {}};
    double delta = std::numeric_limits<double>::infinity();
    for (long k = 1; k <= options.max_iters; ++k) {
        auto next = bellman_t_nu(result.q, mdp, family, map);
        delta = sup_distance(next, result.q);
        result.q = std::move(next);
        result.iterations = k;
        result.deltas.push_back(delta);
        if (delta < options.tol) {
            result.residual = sup_distance(bellman_t_nu(result.q, mdp, family, map), result.q);
            return result;
        }
    }
    throw ConvergenceError("fixed_point: T_nu iteration did not converge", delta, options.max_iters);
}

/// One observed transition under policy c.
struct FamilyTransition {
    std::size_t state;
    std::size_t policy;
    double reward;
    std::size_t next_state;
};

/// In-place generalized Q-learning update of entry (x_t, C_t):
/// q += alpha [r_t + gamma sup_C N_nu q(x_{t+1}, C) - q].
inline void q_learning_step(FamilyQFunction& q, const FamilyTransition& t, double alpha, double gamma,
                            const NeighborhoodMap& map) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("q_learning_step: alpha must lie in [0, 1]");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ArgumentError("q_learning_step: gamma must lie in [0, 1)");
    if (t.state >= q.n_states() || t.next_state >= q.n_states() || t.policy >= q.n_policies())
        throw ConfigError("q_learning_step: transition indices out of range");
    const double target = t.reward + gamma * best_neighborhood_value(q, t.next_state, map);
    double& entry = q(t.state, t.policy);
    entry += alpha * (target - entry);
}

}  // namespace cbrl::mdp
