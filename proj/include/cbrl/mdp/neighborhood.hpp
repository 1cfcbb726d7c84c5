#pragma once

#include <cbrl/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cbrl::mdp {

enum class NeighborhoodKind { max, min, average };

inline const char* to_string(NeighborhoodKind kind) {
    switch (kind) {
        case NeighborhoodKind::max: return "max";
        case NeighborhoodKind::min: return "min";
        case NeighborhoodKind::average: return "average";
    }
    return "?";
}

/// Disjoint cover of the state space by M regions.
class Partition {
public:
    explicit Partition(std::vector<std::size_t> region_of) : region_of_(std::move(region_of)) {
        if (region_of_.empty()) throw ConfigError("Partition: empty state space");
        const std::size_t m = *std::max_element(region_of_.begin(), region_of_.end()) + 1;
        members_.resize(m);
        for (std::size_t x = 0; x < region_of_.size(); ++x) members_[region_of_[x]].push_back(x);
        for (const auto& r : members_)
            if (r.empty()) throw ConfigError("Partition: region map is not surjective");
    }

    static Partition singletons(std::size_t n_states) {
        std::vector<std::size_t> r(n_states);
        for (std::size_t x = 0; x < n_states; ++x) r[x] = x;
        return Partition(std::move(r));
    }

    static Partition whole(std::size_t n_states) { return Partition(std::vector<std::size_t>(n_states, 0)); }

    std::size_t n_states() const noexcept { return region_of_.size(); }
    std::size_t n_regions() const noexcept { return members_.size(); }
    std::size_t region_of(std::size_t x) const { return region_of_[x]; }
    const std::vector<std::size_t>& members(std::size_t region) const { return members_[region]; }
    const std::vector<std::size_t>& region_map() const noexcept { return region_of_; }

private:
    std::vector<std::size_t> region_of_;
    std::vector<std::vector<std::size_t>> members_;
};

/// Neighborhood function nu together with the aggregation operator N_nu.
///
/// For the average kind, weights(x) is a probability vector over neighbors(x),
/// in the same order.
class NeighborhoodMap {
public:
    static constexpr double weight_tolerance = 1e-12;

    NeighborhoodMap(std::vector<std::vector<std::size_t>> nu, NeighborhoodKind kind,
                    std::vector<std::vector<double>> weights = {})
        : nu_(std::move(nu)), kind_(kind), weights_(std::move(weights)) {
        const std::size_t n = nu_.size();
        if (n == 0) throw ConfigError("NeighborhoodMap: empty state space");
        for (std::size_t x = 0; x < n; ++x) {
            const auto& hood = nu_[x];
            if (std::find(hood.begin(), hood.end(), x) == hood.end())
                throw ConfigError("NeighborhoodMap: state " + std::to_string(x) + " missing from its own neighborhood");
            for (auto y : hood)
                if (y >= n) throw ConfigError("NeighborhoodMap: neighbor index out of range");
        }
        if (kind_ == NeighborhoodKind::average) {
            if (weights_.empty()) {
                weights_.resize(n);
                for (std::size_t x = 0; x < n; ++x)
                    weights_[x].assign(nu_[x].size(), 1.0 / static_cast<double>(nu_[x].size()));
            }
            if (weights_.size() != n) throw ConfigError("NeighborhoodMap: one weight vector per state required");
            for (std::size_t x = 0; x < n; ++x) {
                if (weights_[x].size() != nu_[x].size())
                    throw ConfigError("NeighborhoodMap: weight vector length differs from neighborhood size");
                double sum = 0.0;
                for (double w : weights_[x]) {
                    if (!(w >= 0.0)) throw ConfigError("NeighborhoodMap: negative weight");
                    sum += w;
                }
                if (std::abs(sum - 1.0) > weight_tolerance)
                    throw ConfigError("NeighborhoodMap: weights of state " + std::to_string(x) + " do not sum to 1");
            }
        } else if (!weights_.empty()) {
            throw ConfigError("NeighborhoodMap: weights are only meaningful for the average kind");
        }
    }

    /// nu(x) = {x} for every state.
    static NeighborhoodMap singleton(std::size_t n_states, NeighborhoodKind kind = NeighborhoodKind::max) {
        std::vector<std::vector<std::size_t>> nu(n_states);
        for (std::size_t x = 0; x < n_states; ++x) nu[x] = {x};
        return NeighborhoodMap(std::move(nu), kind);
    }

    /// nu(x) = Omega_{p(x)}. For the average kind, zeta gives one weight per
    /// state (each region's weights summing to 1); uniform when omitted.
    static NeighborhoodMap from_partition(const Partition& partition, NeighborhoodKind kind,
                                          std::optional<std::vector<double>> zeta = std::nullopt) {
        const std::size_t n = partition.n_states();
        std::vector<std::vector<std::size_t>> nu(n);
        std::vector<std::vector<double>> weights;
        for (std::size_t x = 0; x < n; ++x) nu[x] = partition.members(partition.region_of(x));
        if (kind == NeighborhoodKind::average) {
            const auto z = zeta ? *zeta : uniform_zeta(partition);
            if (z.size() != n) throw ConfigError("NeighborhoodMap: zeta must have one entry per state");
            weights.resize(n);
            for (std::size_t x = 0; x < n; ++x)
                for (auto y : nu[x]) weights[x].push_back(z[y]);
        } else if (zeta) {
            throw ConfigError("NeighborhoodMap: zeta is only meaningful for the average kind");
        }
        return NeighborhoodMap(std::move(nu), kind, std::move(weights));
    }

    static std::vector<double> uniform_zeta(const Partition& partition) {
        std::vector<double> z(partition.n_states());
        for (std::size_t x = 0; x < z.size(); ++x)
            z[x] = 1.0 / static_cast<double>(partition.members(partition.region_of(x)).size());
        return z;
    }

    std::size_t n_states() const noexcept { return nu_.size(); }
    NeighborhoodKind kind() const noexcept { return kind_; }
    const std::vector<std::size_t>& neighbors(std::size_t x) const { return nu_[x]; }
    const std::vector<double>& weights(std::size_t x) const { return weights_[x]; }

private:
    std::vector<std::vector<std::size_t>> nu_;
    NeighborhoodKind kind_;
    std::vector<std::vector<double>> weights_;
};

/// Table q^F(x, C) over states and policy indices.
class FamilyQFunction {
public:
    FamilyQFunction(std::size_t n_states, std::size_t n_policies, double fill = 0.0)
        : n_states_(n_states), n_policies_(n_policies), values_(n_states * n_policies, fill) {}

    std::size_t n_states() const noexcept { return n_states_; }
    std::size_t n_policies() const noexcept { return n_policies_; }

    double& operator()(std::size_t x, std::size_t c) { return values_[x * n_policies_ + c]; }
    double operator()(std::size_t x, std::size_t c) const { return values_[x * n_policies_ + c]; }

    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    friend bool operator==(const FamilyQFunction&, const FamilyQFunction&) = default;

private:
    std::size_t n_states_;
    std::size_t n_policies_;
    std::vector<double> values_;
};

inline double sup_distance(const FamilyQFunction& a, const FamilyQFunction& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
    return d;
}

}  // namespace cbrl::mdp
