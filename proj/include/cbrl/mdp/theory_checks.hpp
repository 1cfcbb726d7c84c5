#pragma once

#include <cbrl/mdp/aggregate.hpp>
#include <cbrl/mdp/discrete_mdp.hpp>
#include <cbrl/mdp/neighborhood.hpp>
#include <cbrl/mdp/operators.hpp>
#include <cbrl/mdp/policy_family.hpp>
#include <cbrl/mdp/random_mdp.hpp>
#include <cbrl/mdp/value_iteration.hpp>
#include <cbrl/random.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace cbrl::mdp {

/// Outcome of one numerical check of the neighborhood-operator framework.
struct CheckResult {
    std::string id;
    std::string description;
    long instances = 0;
    long violations = 0;
    /// Worst observed value of the checked quantity (meaning given by metric_name).
    double worst = 0.0;
    std::string metric_name;
    double threshold = 0.0;

    bool passed() const noexcept { return instances > 0 && violations == 0; }
};

struct TheoryCheckOptions {
    std::uint64_t seed = 20240601;
    long contraction_instances = 1000;
    long value_instances = 100;
    long aggregate_instances = 100;
    long q_learning_instances = 5;
    long q_learning_sweeps = 1000000;
    double tol = 1e-9;
    /// Rounding slack for inequalities that hold exactly in real arithmetic.
    double float_slack = 1e-12;
};

namespace detail {

struct RandomInstance {
    DiscreteMdp mdp;
    std::size_t n_states;
    std::size_t n_actions;
};

inline RandomInstance draw_instance(Rng& rng, std::size_t max_states, std::size_t max_actions, double gamma_low,
                                    double gamma_high, std::size_t min_states = 2) {
    std::uniform_int_distribution<std::size_t> ns(min_states, max_states), na(1, max_actions);
    std::uniform_real_distribution<double> g(gamma_low, gamma_high);
    const std::size_t n = ns(rng), a = na(rng);
    const double gamma = g(rng);
    return {random_mdp(n, a, gamma, rng()), n, a};
}

inline PolicyFamily random_subfamily(std::size_t n_states, std::size_t n_actions, std::size_t max_size, Rng& rng) {
    std::uniform_int_distribution<std::size_t> act(0, n_actions - 1);
    std::uniform_int_distribution<std::size_t> size(1, max_size);
    std::vector<std::vector<std::size_t>> tables(size(rng), std::vector<std::size_t>(n_states));
    for (auto& t : tables)
        for (auto& a : t) a = act(rng);
    return PolicyFamily(n_states, n_actions, std::move(tables));
}

inline FamilyQFunction random_q(std::size_t n_states, std::size_t n_policies, Rng& rng) {
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    FamilyQFunction q(n_states, n_policies);
    for (auto& v : q.values()) v = u(rng);
    return q;
}

// Stop tolerance for T_nu iteration that leaves the returned table within tol
// of the true fixed point (successive change d bounds the error by gamma d / (1 - gamma)).
inline FixedPointOptions accurate_to(double tol, double gamma) {
    return {gamma == 0.0 ? tol : tol * (1.0 - gamma) / gamma, 1000000};
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace detail

/// ||T_nu q1 - T_nu q2|| <= gamma ||q1 - q2|| on random instances of one operator kind.
inline CheckResult check_contraction(NeighborhoodKind kind, const TheoryCheckOptions& opt = {}) {
    CheckResult res{std::string("contraction-") + to_string(kind),
                    std::string("||T q1 - T q2|| <= gamma ||q1 - q2|| (") + to_string(kind) + " operator)",
                    0, 0, 0.0, "max excess over gamma*||q1-q2||", opt.float_slack};
    Rng rng(derive_seed(opt.seed, {1, static_cast<std::uint64_t>(kind)}));
    res.worst = -std::numeric_limits<double>::infinity();
    for (long i = 0; i < opt.contraction_instances; ++i) {
        auto inst = detail::draw_instance(rng, 6, 3, 0.05, 0.99, 1);
        auto family = detail::random_subfamily(inst.n_states, inst.n_actions, 6, rng);
        auto map = random_neighborhood(inst.n_states, kind, rng);
        auto q1 = detail::random_q(inst.n_states, family.size(), rng);
        auto q2 = detail::random_q(inst.n_states, family.size(), rng);
        const double lhs = sup_distance(bellman_t_nu(q1, inst.mdp, family, map), bellman_t_nu(q2, inst.mdp, family, map));
        const double excess = lhs - inst.mdp.gamma() * sup_distance(q1, q2);
        res.worst = std::max(res.worst, excess);
        ++res.instances;
        if (excess > opt.float_slack) ++res.violations;
    }
    return res;
}

/// ||N q1 - N q2|| <= ||q1 - q2|| for one operator kind.
inline CheckResult check_operator_bound(NeighborhoodKind kind, const TheoryCheckOptions& opt = {}) {
    CheckResult res{std::string("operator-bound-") + to_string(kind),
                    std::string("||N q1 - N q2|| <= ||q1 - q2|| (") + to_string(kind) + " operator)",
                    0, 0, 0.0, "max excess over ||q1-q2||", opt.float_slack};
    Rng rng(derive_seed(opt.seed, {2, static_cast<std::uint64_t>(kind)}));
    res.worst = -std::numeric_limits<double>::infinity();
    std::uniform_int_distribution<std::size_t> ns(1, 8), nf(1, 6);
    for (long i = 0; i < opt.contraction_instances; ++i) {
        const std::size_t n = ns(rng), f = nf(rng);
        auto map = random_neighborhood(n, kind, rng);
        auto q1 = detail::random_q(n, f, rng);
        auto q2 = detail::random_q(n, f, rng);
        double lhs = 0.0;
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t c = 0; c < f; ++c)
                lhs = std::max(lhs, std::abs(apply_neighborhood(q1, x, c, map) - apply_neighborhood(q2, x, c, map)));
        const double excess = lhs - sup_distance(q1, q2);
        res.worst = std::max(res.worst, excess);
        ++res.instances;
        if (excess > opt.float_slack) ++res.violations;
    }
    return res;
}

/// Singleton neighborhoods with the full deterministic family reproduce classical value iteration.
inline CheckResult check_singleton_optimality(const TheoryCheckOptions& opt = {}) {
    CheckResult res{"singleton-optimality", "singleton nu, full family: max_C q*(x,C) == classical V*(x)",
                    0, 0, 0.0, "max |V_F - V_classic|", 1e-6};
    Rng rng(derive_seed(opt.seed, {3}));
    for (long i = 0; i < opt.value_instances; ++i) {
        auto inst = detail::draw_instance(rng, 6, 3, 0.3, 0.9, 1);
        const auto family = PolicyFamily::all_deterministic(inst.n_states, inst.n_actions);
        const auto map = NeighborhoodMap::singleton(inst.n_states);
        const auto fp = fixed_point(inst.mdp, family, map, detail::accurate_to(opt.tol, inst.mdp.gamma()));
        const auto vi = value_iteration_classic(inst.mdp, opt.tol);
        const double err = detail::max_abs_diff(neighborhood_values(fp.q, map), vi.values);
        res.worst = std::max(res.worst, err);
        ++res.instances;
        if (!(err <= res.threshold)) ++res.violations;
    }
    return res;
}

/// Under the max operator on a partition, V* bounds the classical optimal value from above.
inline CheckResult check_max_upper_bound(const TheoryCheckOptions& opt = {}) {
    CheckResult res{"max-upper-bound", "max operator, partitioned nu: V*(x) >= classical V*(x) - 2 tol",
                    0, 0, 0.0, "max (V_classic - V_max)", 2.0 * opt.tol};
    Rng rng(derive_seed(opt.seed, {4}));
    res.worst = -std::numeric_limits<double>::infinity();
    for (long i = 0; i < opt.value_instances; ++i) {
        auto inst = detail::draw_instance(rng, 6, 3, 0.3, 0.9, 2);
        std::uniform_int_distribution<std::size_t> nr(1, inst.n_states);
        const auto partition = random_partition(inst.n_states, nr(rng), rng);
        const auto family = PolicyFamily::all_deterministic(inst.n_states, inst.n_actions);
        const auto map = NeighborhoodMap::from_partition(partition, NeighborhoodKind::max);
        const auto fp = fixed_point(inst.mdp, family, map, detail::accurate_to(opt.tol, inst.mdp.gamma()));
        const auto vi = value_iteration_classic(inst.mdp, opt.tol);
        const auto v = neighborhood_values(fp.q, map);
        double gap = -std::numeric_limits<double>::infinity();
        for (std::size_t x = 0; x < v.size(); ++x) gap = std::max(gap, vi.values[x] - v[x]);
        res.worst = std::max(res.worst, gap);
        ++res.instances;
        if (gap > res.threshold) ++res.violations;
    }
    return res;
}

/// Value iteration on the aggregate MDP matches the partitioned fixed point.
inline CheckResult check_aggregate(NeighborhoodKind kind, const TheoryCheckOptions& opt = {}) {
    const bool average = kind == NeighborhoodKind::average;
    CheckResult res{std::string("aggregate-") + to_string(kind),
                    std::string("aggregate MDP (") + to_string(kind) + ") value iteration == partitioned fixed point",
                    0, 0, 0.0, "max |V_aggregate - V_fixed_point|", 1e-6};
    Rng rng(derive_seed(opt.seed, {5, static_cast<std::uint64_t>(kind)}));
    for (long i = 0; i < opt.aggregate_instances; ++i) {
        auto inst = detail::draw_instance(rng, 5, 3, 0.3, 0.9, 2);
        std::uniform_int_distribution<std::size_t> nr(1, inst.n_states);
        const auto partition = random_partition(inst.n_states, nr(rng), rng);
        const auto family = PolicyFamily::all_deterministic(inst.n_states, inst.n_actions);
        const auto zeta = random_zeta(partition, rng);
        const auto map = average ? NeighborhoodMap::from_partition(partition, kind, zeta)
                                 : NeighborhoodMap::from_partition(partition, kind);
        const auto fp = fixed_point(inst.mdp, family, map, detail::accurate_to(opt.tol, inst.mdp.gamma()));
        const auto agg = average ? build_aggregate_average(inst.mdp, family, partition, zeta)
                                 : build_aggregate_max(inst.mdp, family, partition);
        const auto vi = value_iteration_classic(agg.mdp, opt.tol);
        const double err = detail::max_abs_diff(agg.expand(vi.values), neighborhood_values(fp.q, map));
        res.worst = std::max(res.worst, err);
        ++res.instances;
        if (!(err <= res.threshold)) ++res.violations;
    }
    return res;
}

/// Generalized Q-learning with alpha = 1/(1 + visits) and cyclic sampling of
/// every (state, policy) pair converges to the fixed point of T_nu.
inline CheckResult check_q_learning(const TheoryCheckOptions& opt = {}) {
    CheckResult res{"q-learning", "generalized Q-learning, alpha=1/(1+visits), cyclic sampling: ||q_t - q*|| < 1e-2",
                    0, 0, 0.0, "final ||q_t - q*||", 1e-2};
    Rng rng(derive_seed(opt.seed, {6}));
    const NeighborhoodKind kinds[] = {NeighborhoodKind::max, NeighborhoodKind::min, NeighborhoodKind::average};
    for (long i = 0; i < opt.q_learning_instances; ++i) {
        const auto mdp = random_mdp(3, 2, 0.5, rng());
        const auto family = detail::random_subfamily(3, 2, 4, rng);
        const auto kind = kinds[static_cast<std::size_t>(i) % 3];
        const auto partition = random_partition(3, 2, rng);
        const auto map = i % 2 == 0 ? NeighborhoodMap::singleton(3, kind) : NeighborhoodMap::from_partition(partition, kind);
        const auto target = fixed_point(mdp, family, map, detail::accurate_to(opt.tol, mdp.gamma())).q;

        FamilyQFunction q(3, family.size());
        std::vector<long> visits(q.values().size(), 0);
        Rng sampler(rng());
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (long sweep = 0; sweep < opt.q_learning_sweeps; ++sweep) {
            for (std::size_t x = 0; x < 3; ++x) {
                for (std::size_t c = 0; c < family.size(); ++c) {
                    const std::size_t a = family.action(c, x);
                    const auto row = mdp.p_row(x, a);
                    double u = unit(sampler), acc = 0.0;
                    std::size_t y = 0;
                    for (; y + 1 < row.size(); ++y) {
                        acc += row[y];
                        if (u < acc) break;
                    }
                    auto& n = visits[x * family.size() + c];
                    const double alpha = 1.0 / (1.0 + static_cast<double>(n++));
                    q_learning_step(q, {x, c, mdp.r(x, a, y), y}, alpha, mdp.gamma(), map);
                }
            }
        }
        const double err = sup_distance(q, target);
        res.worst = std::max(res.worst, err);
        ++res.instances;
        if (!(err < res.threshold)) ++res.violations;
    }
    return res;
}

/// The full suite, in report order.
inline std::vector<CheckResult> run_theory_checks(const TheoryCheckOptions& opt = {}) {
    std::vector<CheckResult> out;
    for (auto k : {NeighborhoodKind::max, NeighborhoodKind::min, NeighborhoodKind::average})
        out.push_back(check_contraction(k, opt));
    for (auto k : {NeighborhoodKind::max, NeighborhoodKind::min, NeighborhoodKind::average})
        out.push_back(check_operator_bound(k, opt));
    out.push_back(check_singleton_optimality(opt));
    out.push_back(check_max_upper_bound(opt));
    out.push_back(check_aggregate(NeighborhoodKind::average, opt));
    out.push_back(check_aggregate(NeighborhoodKind::max, opt));
    out.push_back(check_q_learning(opt));
    return out;
}

}  // namespace cbrl::mdp
