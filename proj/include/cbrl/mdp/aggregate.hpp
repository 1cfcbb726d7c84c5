#pragma once

#include <cbrl/error.hpp>
#include <cbrl/mdp/discrete_mdp.hpp>
#include <cbrl/mdp/neighborhood.hpp>
#include <cbrl/mdp/policy_family.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace cbrl::mdp {

/// Region-representative state z paired with a policy index C.
struct RepresentativeAction {
    std::size_t state;
    std::size_t policy;
    friend bool operator==(const RepresentativeAction&, const RepresentativeAction&) = default;
};

/// MDP over the M regions of a partition.
///
/// For the average construction the aggregate actions are the family's policy
/// indices. For the max construction region i's actions are the pairs
/// (z in Omega_i, C in F), listed in `actions[i]`; regions with fewer pairs
/// than the widest region repeat their first pair so every region exposes the
/// same action count (duplicates never change a max).
struct AggregateMdp {
    DiscreteMdp mdp;
    std::vector<std::size_t> region_of;
    std::vector<std::vector<RepresentativeAction>> actions;

    /// Lift aggregate values back onto the original states.
    std::vector<double> expand(const std::vector<double>& region_values) const {
        std::vector<double> v(region_of.size());
        for (std::size_t x = 0; x < v.size(); ++x) v[x] = region_values[region_of[x]];
        return v;
    }
};

namespace detail {
inline constexpr double aggregate_row_tolerance = 1e-10;

inline void check_aggregate_inputs(const DiscreteMdp& mdp, const PolicyFamily& family, const Partition& partition) {
    if (partition.n_states() != mdp.n_states() || family.n_states() != mdp.n_states())
        throw ConfigError("aggregate: partition, family and MDP disagree on n_states");
    if (family.n_actions() != mdp.n_actions()) throw ConfigError("aggregate: family and MDP disagree on n_actions");
}

// Reward of an aggregate transition from its probability mass and reward mass.
// Unreachable transitions get reward 0. Accumulated probabilities can exceed 1
// by rounding and are clamped after the reward is formed.
inline double conditional_reward(double prob, double reward_mass) { return prob > 0.0 ? reward_mass / prob : 0.0; }
}  // namespace detail

/// Aggregate MDP for the average neighborhood operator with region weights zeta:
///   P_C(i,j) = sum_{z in Omega_i} sum_{y in Omega_j} P_{C(z)}(z,y) zeta(z)
///   r(i,C,j) = (1 / P_C(i,j)) sum_{z in Omega_i} sum_{y in Omega_j} P_{C(z)}(z,y) zeta(z) r(z,C(z),y)
inline AggregateMdp build_aggregate_average(const DiscreteMdp& mdp, const PolicyFamily& family,
                                            const Partition& partition,
                                            std::optional<std::vector<double>> zeta = std::nullopt) {
    detail::check_aggregate_inputs(mdp, family, partition);
    const auto z = zeta ? *zeta : NeighborhoodMap::uniform_zeta(partition);
    // Validates zeta per region.
    (void)NeighborhoodMap::from_partition(partition, NeighborhoodKind::average, z);

    const std::size_t m = partition.n_regions();
    const std::size_t nf = family.size();
    std::vector<double> p(m * nf * m, 0.0), rmass(m * nf * m, 0.0);
    auto idx = [&](std::size_t i, std::size_t c, std::size_t j) { return (i * nf + c) * m + j; };
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t c = 0; c < nf; ++c) {
            for (auto s : partition.members(i)) {
                const std::size_t a = family.action(c, s);
                for (std::size_t y = 0; y < mdp.n_states(); ++y) {
                    const double w = mdp.p(s, a, y) * z[s];
                    const std::size_t k = idx(i, c, partition.region_of(y));
                    p[k] += w;
                    rmass[k] += w * mdp.r(s, a, y);
                }
            }
        }
    }
    std::vector<double> r(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        r[k] = detail::conditional_reward(p[k], rmass[k]);
        p[k] = std::min(p[k], 1.0);
    }

    std::vector<std::vector<RepresentativeAction>> actions(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t c = 0; c < nf; ++c) actions[i].push_back({partition.members(i).front(), c});
    return AggregateMdp{DiscreteMdp(m, nf, std::move(p), std::move(r), mdp.gamma(), detail::aggregate_row_tolerance),
                        partition.region_map(), std::move(actions)};
}

/// Aggregate MDP for the max neighborhood operator, with actions (z, C):
///   P_{C,z}(i,j) = sum_{y in Omega_j} P_{C(z)}(z,y)
///   r(i,(C,z),j) = (1 / P_{C,z}(i,j)) sum_{y in Omega_j} P_{C(z)}(z,y) r(z,C(z),y)
inline AggregateMdp build_aggregate_max(const DiscreteMdp& mdp, const PolicyFamily& family,
                                        const Partition& partition) {
    detail::check_aggregate_inputs(mdp, family, partition);
    const std::size_t m = partition.n_regions();
    const std::size_t nf = family.size();

    std::vector<std::vector<RepresentativeAction>> actions(m);
    std::size_t width = 0;
    for (std::size_t i = 0; i < m; ++i) {
        for (auto s : partition.members(i))
            for (std::size_t c = 0; c < nf; ++c) actions[i].push_back({s, c});
        width = std::max(width, actions[i].size());
    }
    for (auto& list : actions) {
        const auto first = list.front();
        list.resize(width, first);
    }

    std::vector<double> p(m * width * m, 0.0), rmass(m * width * m, 0.0);
    auto idx = [&](std::size_t i, std::size_t k, std::size_t j) { return (i * width + k) * m + j; };
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < width; ++k) {
            const auto [s, c] = actions[i][k];
            const std::size_t a = family.action(c, s);
            for (std::size_t y = 0; y < mdp.n_states(); ++y) {
                const std::size_t t = idx(i, k, partition.region_of(y));
                p[t] += mdp.p(s, a, y);
                rmass[t] += mdp.p(s, a, y) * mdp.r(s, a, y);
            }
        }
    }
    std::vector<double> r(p.size());
    for (std::size_t t = 0; t < p.size(); ++t) {
        r[t] = detail::conditional_reward(p[t], rmass[t]);
        p[t] = std::min(p[t], 1.0);
    }
    return AggregateMdp{DiscreteMdp(m, width, std::move(p), std::move(r), mdp.gamma(), detail::aggregate_row_tolerance),
                        partition.region_map(), std::move(actions)};
}

}  // namespace cbrl::mdp
