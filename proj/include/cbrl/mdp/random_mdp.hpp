#pragma once

#include <cbrl/mdp/discrete_mdp.hpp>
#include <cbrl/mdp/neighborhood.hpp>
#include <cbrl/random.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace cbrl::mdp {

struct RandomMdpOptions {
    double reward_low = -1.0;
    double reward_high = 1.0;
    /// Probability that a next-state entry is forced to zero (row keeps at least one entry).
    double sparsity = 0.3;
};

/// Random MDP with rows drawn as normalized uniform weights. Fully determined by seed.
inline DiscreteMdp random_mdp(std::size_t n_states, std::size_t n_actions, double gamma, std::uint64_t seed,
                              RandomMdpOptions options = {}) {
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> reward(options.reward_low, options.reward_high);
    std::uniform_int_distribution<std::size_t> pick(0, n_states - 1);
    std::vector<double> p(n_states * n_actions * n_states), r(p.size());
    for (std::size_t row = 0; row < n_states * n_actions; ++row) {
        double* w = p.data() + row * n_states;
        double sum = 0.0;
        for (std::size_t y = 0; y < n_states; ++y) {
            w[y] = unit(rng) < options.sparsity ? 0.0 : unit(rng);
            sum += w[y];
        }
        if (sum == 0.0) {
            w[pick(rng)] = 1.0;
            sum = 1.0;
        }
        for (std::size_t y = 0; y < n_states; ++y) w[y] /= sum;
        for (std::size_t y = 0; y < n_states; ++y) r[row * n_states + y] = reward(rng);
    }
    return DiscreteMdp(n_states, n_actions, std::move(p), std::move(r), gamma, 1e-12);
}

/// Random surjective partition into n_regions regions.
inline Partition random_partition(std::size_t n_states, std::size_t n_regions, Rng& rng) {
    std::vector<std::size_t> region(n_states);
    for (std::size_t x = 0; x < n_states; ++x) region[x] = x < n_regions ? x : 0;
    std::uniform_int_distribution<std::size_t> pick(0, n_regions - 1);
    for (std::size_t x = n_regions; x < n_states; ++x) region[x] = pick(rng);
    std::shuffle(region.begin(), region.end(), rng);
    return Partition(std::move(region));
}

/// Random probability vector zeta over each region of a partition.
inline std::vector<double> random_zeta(const Partition& partition, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    std::vector<double> z(partition.n_states());
    for (std::size_t m = 0; m < partition.n_regions(); ++m) {
        double sum = 0.0;
        for (auto x : partition.members(m)) sum += (z[x] = unit(rng));
        for (auto x : partition.members(m)) z[x] /= sum;
    }
    return z;
}

/// Random neighborhood map (not necessarily a partition), each nu(x) containing x.
inline NeighborhoodMap random_neighborhood(std::size_t n_states, NeighborhoodKind kind, Rng& rng) {
    std::bernoulli_distribution include(0.4);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    std::vector<std::vector<std::size_t>> nu(n_states);
    std::vector<std::vector<double>> weights;
    for (std::size_t x = 0; x < n_states; ++x)
        for (std::size_t y = 0; y < n_states; ++y)
            if (y == x || include(rng)) nu[x].push_back(y);
    if (kind == NeighborhoodKind::average) {
        weights.resize(n_states);
        for (std::size_t x = 0; x < n_states; ++x) {
            double sum = 0.0;
            for (std::size_t i = 0; i < nu[x].size(); ++i) {
                weights[x].push_back(unit(rng));
                sum += weights[x].back();
            }
            for (auto& w : weights[x]) w /= sum;
            // Absorb rounding into the last entry.
            double total = 0.0;
            for (auto w : weights[x]) total += w;
            weights[x].back() += 1.0 - total;
        }
    }
    return NeighborhoodMap(std::move(nu), kind, std::move(weights));
}

}  // namespace cbrl::mdp
