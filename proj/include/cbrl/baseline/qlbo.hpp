#pragma once

#include <cbrl/envs/episode.hpp>
#include <cbrl/error.hpp>
#include <cbrl/random.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace cbrl::baseline {

/// Equal-width bins per dimension over a clamped box; row-major cell index
/// (the first dimension varies slowest).
class GridDiscretizer {
public:
    GridDiscretizer(std::vector<std::size_t> bins, std::vector<envs::Bounds> ranges)
        : bins_(std::move(bins)), ranges_(std::move(ranges)) {
        if (bins_.empty() || bins_.size() != ranges_.size())
            throw ConfigError("discretizer: one bin count per range required");
        n_cells_ = 1;
        for (std::size_t d = 0; d < bins_.size(); ++d) {
            if (bins_[d] < 1) throw ConfigError("discretizer: bin counts must be >= 1");
            if (!(ranges_[d].low < ranges_[d].high) || !std::isfinite(ranges_[d].low) ||
                !std::isfinite(ranges_[d].high))
                throw ConfigError("discretizer: ranges must be finite with low < high");
            n_cells_ *= bins_[d];
        }
    }

    std::size_t dims() const noexcept { return bins_.size(); }
    std::size_t n_cells() const noexcept { return n_cells_; }
    const std::vector<std::size_t>& bins() const noexcept { return bins_; }
    const std::vector<envs::Bounds>& ranges() const noexcept { return ranges_; }

    std::size_t bin(std::size_t d, double v) const noexcept {
        const auto& r = ranges_[d];
        const double c = std::clamp(v, r.low, r.high);
        const auto b = static_cast<std::size_t>(std::floor((c - r.low) * static_cast<double>(bins_[d]) / (r.high - r.low)));
        return std::min(b, bins_[d] - 1);
    }

    std::size_t cell(std::span<const double> state) const {
        if (state.size() != bins_.size()) throw ConfigError("discretizer: state dimension mismatch");
        std::size_t idx = 0;
        for (std::size_t d = 0; d < bins_.size(); ++d) idx = idx * bins_[d] + bin(d, state[d]);
        return idx;
    }

private:
    std::vector<std::size_t> bins_;
    std::vector<envs::Bounds> ranges_;
    std::size_t n_cells_ = 0;
};

/// Grids used for the three environments.
inline GridDiscretizer default_discretizer(const std::string& env) {
    if (env == "mountaincar") return GridDiscretizer({40, 40}, {{-1.2, 0.6}, {-0.07, 0.07}});
    if (env == "cartpole")
        return GridDiscretizer({8, 8, 10, 10}, {{-2.4, 2.4}, {-3.0, 3.0}, {-0.2095, 0.2095}, {-3.5, 3.5}});
    if (env == "lander")
        return GridDiscretizer(std::vector<std::size_t>(6, 4),
                               {{-1.0, 1.0}, {0.0, 1.5}, {-1.0, 1.0}, {-1.5, 0.5}, {-0.5, 0.5}, {-1.0, 1.0}});
    throw ConfigError("no default discretizer for '" + env + "'");
}

class QTable {
public:
    QTable(std::size_t n_cells, std::size_t n_actions)
        : n_cells_(n_cells), n_actions_(n_actions), q_(n_cells * n_actions, 0.0), visits_(n_cells * n_actions, 0) {
        if (n_cells < 1 || n_actions < 1) throw ConfigError("QTable: dimensions must be >= 1");
    }

    std::size_t n_cells() const noexcept { return n_cells_; }
    std::size_t n_actions() const noexcept { return n_actions_; }

    double& operator()(std::size_t cell, std::size_t action) { return q_.at(cell * n_actions_ + action); }
    double operator()(std::size_t cell, std::size_t action) const { return q_.at(cell * n_actions_ + action); }
    long long visits(std::size_t cell, std::size_t action) const { return visits_.at(cell * n_actions_ + action); }
    const std::vector<double>& values() const noexcept { return q_; }
    const std::vector<long long>& visit_counts() const noexcept { return visits_; }

    void set_visit_counts(std::vector<long long> v) {
        if (v.size() != visits_.size()) throw ConfigError("QTable: wrong number of visit counts");
        visits_ = std::move(v);
    }

    double max_value(std::size_t cell) const {
        const auto* row = q_.data() + cell * n_actions_;
        return *std::max_element(row, row + n_actions_);
    }

    /// Lowest index among maximizers.
    std::size_t greedy(std::size_t cell) const {
        const auto* row = q_.data() + cell * n_actions_;
        return static_cast<std::size_t>(std::max_element(row, row + n_actions_) - row);
    }

    /// Q <- (1 - alpha) Q + alpha (r + gamma max Q(next, .)), target r when done.
    void update(std::size_t cell, std::size_t action, double reward, std::size_t next_cell, bool done, double alpha,
                double gamma) {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("q_update: alpha outside [0, 1]");
        const double target = done ? reward : reward + gamma * max_value(next_cell);
        auto& q = (*this)(cell, action);
        q = (1.0 - alpha) * q + alpha * target;
        visits_[cell * n_actions_ + action] += 1;
    }

    std::size_t epsilon_greedy(std::size_t cell, double epsilon, Rng& rng) const {
        if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ArgumentError("epsilon_greedy: epsilon outside [0, 1]");
        if (epsilon > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < epsilon)
            return std::uniform_int_distribution<std::size_t>(0, n_actions_ - 1)(rng);
        return greedy(cell);
    }

    bool operator==(const QTable&) const = default;

private:
    std::size_t n_cells_;
    std::size_t n_actions_;
    std::vector<double> q_;
    std::vector<long long> visits_;
};

inline void q_update(QTable& t, std::size_t cell, std::size_t action, double reward, std::size_t next_cell, bool done,
                     double alpha, double gamma) {
    t.update(cell, action, reward, next_cell, done, alpha, gamma);
}

inline std::size_t epsilon_greedy(const QTable& t, std::size_t cell, double epsilon, Rng& rng) {
    return t.epsilon_greedy(cell, epsilon, rng);
}

/// alpha = clamp(1 / (1 + alpha_rate * visits), alpha_min, alpha_max);
/// epsilon decays geometrically from epsilon_start to epsilon_end over the
/// first explore_fraction of training, then stays at epsilon_end.
struct QlboHyperparams {
    double gamma = 0.99;
    double alpha_rate = 0.1;
    double alpha_min = 0.05;
    double alpha_max = 0.5;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double explore_fraction = 1.0;

    void validate() const {
        if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("qlbo: gamma must lie in [0, 1)");
        if (!(alpha_min >= 0.0 && alpha_min <= alpha_max && alpha_max <= 1.0))
            throw ConfigError("qlbo: need 0 <= alpha_min <= alpha_max <= 1");
        if (!(alpha_rate >= 0.0)) throw ConfigError("qlbo: alpha_rate must be >= 0");
        if (!(epsilon_end > 0.0 && epsilon_end <= epsilon_start && epsilon_start <= 1.0))
            throw ConfigError("qlbo: need 0 < epsilon_end <= epsilon_start <= 1");
        if (!(explore_fraction > 0.0 && explore_fraction <= 1.0))
            throw ConfigError("qlbo: explore_fraction must lie in (0, 1]");
    }

    double alpha(long long visits) const noexcept {
        return std::clamp(1.0 / (1.0 + alpha_rate * static_cast<double>(visits)), alpha_min, alpha_max);
    }

    double epsilon(long long episode, long long total) const noexcept {
        const double span = std::max(1.0, explore_fraction * static_cast<double>(total) - 1.0);
        const double frac = std::min(1.0, static_cast<double>(episode) / span);
        return epsilon_start * std::pow(epsilon_end / epsilon_start, frac);
    }
};

struct QlboResult {
    QTable table;
    std::vector<double> curve;
};

/// Tabular epsilon-greedy Q-learning on the grid. Episodes cut by the step cap
/// bootstrap from the next state; only environment terminations use target r.
inline QlboResult train_qlbo(const envs::Environment& env, const GridDiscretizer& grid, const QlboHyperparams& hp,
                             long long episodes, std::uint64_t seed) {
    hp.validate();
    const auto& spec = env.spec();
    if (grid.dims() != spec.state_dim) throw ConfigError("qlbo: discretizer and environment dimensions differ");
    QlboResult out{QTable(grid.n_cells(), spec.n_actions), {}};
    out.curve.reserve(static_cast<std::size_t>(std::max(0LL, episodes)));
    Rng rng(derive_seed(seed, {seed_tag::qlbo}));
    for (long long e = 0; e < episodes; ++e) {
        const double eps = hp.epsilon(e, episodes);
        auto state = env.reset(derive_seed(seed, {seed_tag::train, static_cast<std::uint64_t>(e)}));
        std::size_t cell = grid.cell(state);
        double score = 0.0;
        for (int t = 0; t < spec.max_steps; ++t) {
            const std::size_t a = out.table.epsilon_greedy(cell, eps, rng);
            const auto fb = env.advance(state, a);
            const std::size_t next = grid.cell(state);
            out.table.update(cell, a, fb.reward, next, fb.done, hp.alpha(out.table.visits(cell, a)), hp.gamma);
            score += fb.reward;
            cell = next;
            if (fb.done) break;
        }
        out.curve.push_back(score);
    }
    return out;
}

/// Greedy policy over a frozen table; satisfies envs::Policy.
class GreedyQPolicy {
public:
    GreedyQPolicy(const QTable& table, const GridDiscretizer& grid) : table_(&table), grid_(&grid) {}
    std::size_t input_dim() const noexcept { return grid_->dims(); }
    std::size_t act(std::span<const double> s) const { return table_->greedy(grid_->cell(s)); }

private:
    const QTable* table_;
    const GridDiscretizer* grid_;
};

inline constexpr const char* curve_csv_version = "# cbrl-qlbo-curve v1";

inline void write_curve_csv(std::ostream& os, const std::vector<double>& curve) {
    os << curve_csv_version << '\n' << "episode,score\n";
    os.precision(17);
    for (std::size_t e = 0; e < curve.size(); ++e) os << e << ',' << curve[e] << '\n';
}

inline constexpr const char* qtable_json_version = "cbrl-qtable v1";

inline nlohmann::json to_json(const QTable& t, const GridDiscretizer& grid) {
    nlohmann::json ranges = nlohmann::json::array();
    for (const auto& r : grid.ranges()) ranges.push_back({r.low, r.high});
    return {{"format", qtable_json_version},
            {"n_cells", t.n_cells()},
            {"n_actions", t.n_actions()},
            {"bins", grid.bins()},
            {"ranges", ranges},
            {"q", t.values()},
            {"visits", t.visit_counts()}};
}

struct LoadedQTable {
    QTable table;
    GridDiscretizer grid;
};

inline LoadedQTable qtable_from_json(const nlohmann::json& j) {
    try {
        if (j.value("format", qtable_json_version) != qtable_json_version)
            throw ConfigError("QTable file: unsupported format '" + j.at("format").get<std::string>() + "'");
        std::vector<envs::Bounds> ranges;
        for (const auto& r : j.at("ranges")) ranges.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
        GridDiscretizer grid(j.at("bins").get<std::vector<std::size_t>>(), ranges);
        QTable t(j.at("n_cells").get<std::size_t>(), j.at("n_actions").get<std::size_t>());
        if (t.n_cells() != grid.n_cells()) throw ConfigError("QTable file: cell count disagrees with grid");
        const auto q = j.at("q").get<std::vector<double>>();
        if (q.size() != t.n_cells() * t.n_actions()) throw ConfigError("QTable file: wrong number of entries");
        for (std::size_t c = 0; c < t.n_cells(); ++c)
            for (std::size_t a = 0; a < t.n_actions(); ++a) t(c, a) = q[c * t.n_actions() + a];
        if (j.contains("visits")) t.set_visit_counts(j.at("visits").get<std::vector<long long>>());
        return {std::move(t), std::move(grid)};
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("QTable file: ") + e.what());
    }
}

}  // namespace cbrl::baseline
