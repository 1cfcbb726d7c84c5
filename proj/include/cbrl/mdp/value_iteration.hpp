#pragma once

#include <cbrl/error.hpp>
#include <cbrl/mdp/discrete_mdp.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace cbrl::mdp {

struct ValueIterationResult {
    std::vector<double> values;
    std::vector<std::size_t> policy;
    long iterations = 0;
};

namespace detail {
inline double backup(const DiscreteMdp& mdp, const std::vector<double>& v, std::size_t x, std::size_t a) {
    const auto p = mdp.p_row(x, a);
    const auto r = mdp.r_row(x, a);
    double q = 0.0;
    for (std::size_t y = 0; y < v.size(); ++y)
        if (p[y] != 0.0) q += p[y] * (r[y] + mdp.gamma() * v[y]);
    return q;
}

// Successive iterates closer than this guarantee ||V - V*||_inf < tol.
inline double stopping_delta(double gamma, double tol) {
    return gamma == 0.0 ? std::numeric_limits<double>::infinity() : tol * (1.0 - gamma) / gamma;
}
}  // namespace detail

/// Classical Bellman-optimality value iteration from V = 0. The returned
/// values are within tol of V* in sup norm; the greedy policy breaks ties
/// toward the lowest action index.
inline ValueIterationResult value_iteration_classic(const DiscreteMdp& mdp, double tol = 1e-9,
                                                    long max_iters = 1000000) {
    if (!(tol > 0.0)) throw ArgumentError("value_iteration_classic: tol must be positive");
    const std::size_t n = mdp.n_states();
    const double stop = detail::stopping_delta(mdp.gamma(), tol);
    ValueIterationResult out{std::vector<double>(n, 0.0), std::vector<std::size_t>(n, 0), 0};
    std::vector<double> next(n);
    double delta = std::numeric_limits<double>::infinity();
    for (long k = 1; k <= max_iters; ++k) {
        delta = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < mdp.n_actions(); ++a) best = std::max(best, detail::backup(mdp, out.values, x, a));
            next[x] = best;
            delta = std::max(delta, std::abs(best - out.values[x]));
        }
        out.values.swap(next);
        out.iterations = k;
        if (delta < stop || mdp.gamma() == 0.0) break;
    }
    if (!(delta < stop) && mdp.gamma() != 0.0)
        throw ConvergenceError("value_iteration_classic did not converge", delta, max_iters);
    for (std::size_t x = 0; x < n; ++x) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
            const double q = detail::backup(mdp, out.values, x, a);
            if (q > best) {
                best = q;
                out.policy[x] = a;
            }
        }
    }
    return out;
}

/// Value of a fixed deterministic policy, by iterating its linear Bellman operator.
inline std::vector<double> evaluate_policy(const DiscreteMdp& mdp, const std::vector<std::size_t>& policy,
                                           double tol = 1e-10, long max_iters = 1000000) {
    if (policy.size() != mdp.n_states()) throw ConfigError("evaluate_policy: policy length differs from n_states");
    const std::size_t n = mdp.n_states();
    const double stop = detail::stopping_delta(mdp.gamma(), tol);
    std::vector<double> v(n, 0.0), next(n);
    for (long k = 1; k <= max_iters; ++k) {
        double delta = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            next[x] = detail::backup(mdp, v, x, policy[x]);
            delta = std::max(delta, std::abs(next[x] - v[x]));
        }
        v.swap(next);
        if (delta < stop || mdp.gamma() == 0.0) return v;
    }
    throw ConvergenceError("evaluate_policy did not converge", 0.0, max_iters);
}

}  // namespace cbrl::mdp
