#pragma once

#include <cbrl/error.hpp>

#include <cstddef>
#include <utility>
#include <vector>

namespace cbrl::mdp {

/// A finite, ordered family F of deterministic policies, each stored as an
/// action table indexed by state. The position in the list is the policy index.
class PolicyFamily {
public:
    PolicyFamily(std::size_t n_states, std::size_t n_actions, std::vector<std::vector<std::size_t>> tables)
        : n_states_(n_states), n_actions_(n_actions), tables_(std::move(tables)) {
        if (tables_.empty()) throw ConfigError("PolicyFamily: family must not be empty");
        for (const auto& t : tables_) {
            if (t.size() != n_states_) throw ConfigError("PolicyFamily: table length differs from n_states");
            for (auto a : t)
                if (a >= n_actions_) throw ConfigError("PolicyFamily: action index out of range");
        }
    }

    /// All |A|^|X| deterministic policies, enumerated with state 0 as the
    /// fastest-varying digit.
    static PolicyFamily all_deterministic(std::size_t n_states, std::size_t n_actions) {
        std::vector<std::vector<std::size_t>> allowed(n_states);
        for (auto& a : allowed)
            for (std::size_t i = 0; i < n_actions; ++i) a.push_back(i);
        return product(n_actions, allowed);
    }

    /// The |A| constant policies x -> a, in action order.
    static PolicyFamily constant(std::size_t n_states, std::size_t n_actions) {
        std::vector<std::vector<std::size_t>> tables;
        for (std::size_t a = 0; a < n_actions; ++a) tables.emplace_back(n_states, a);
        return PolicyFamily(n_states, n_actions, std::move(tables));
    }

    /// Every policy choosing, in state x, an action from allowed[x].
    static PolicyFamily product(std::size_t n_actions, const std::vector<std::vector<std::size_t>>& allowed) {
        const std::size_t n = allowed.size();
        if (n == 0) throw ConfigError("PolicyFamily: no states");
        for (const auto& a : allowed)
            if (a.empty()) throw ConfigError("PolicyFamily: empty allowed-action set");
        std::vector<std::vector<std::size_t>> tables;
        std::vector<std::size_t> digit(n, 0);
        while (true) {
            std::vector<std::size_t> t(n);
            for (std::size_t x = 0; x < n; ++x) t[x] = allowed[x][digit[x]];
            tables.push_back(std::move(t));
            std::size_t x = 0;
            while (x < n && ++digit[x] == allowed[x].size()) digit[x++] = 0;
            if (x == n) break;
        }
        return PolicyFamily(n, n_actions, std::move(tables));
    }

    std::size_t size() const noexcept { return tables_.size(); }
    std::size_t n_states() const noexcept { return n_states_; }
    std::size_t n_actions() const noexcept { return n_actions_; }
    std::size_t action(std::size_t policy, std::size_t x) const { return tables_[policy][x]; }
    const std::vector<std::size_t>& table(std::size_t policy) const { return tables_[policy]; }

private:
    std::size_t n_states_;
    std::size_t n_actions_;
    std::vector<std::vector<std::size_t>> tables_;
};

}  // namespace cbrl::mdp
