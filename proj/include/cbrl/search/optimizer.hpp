#pragma once

#include <cbrl/error.hpp>
#include <cbrl/random.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace cbrl::search {

/// Where an objective call sits in the search; lets objectives derive per-candidate seeds.
struct EvalContext {
    std::size_t generation = 0;
    std::size_t slot = 0;
};

struct Evaluation {
    double fitness = 0.0;
    std::vector<double> episode_scores;
};

/// Maximized. Must be a pure function of (genome, context) for reproducible searches.
using Objective = std::function<Evaluation(std::span<const double>, const EvalContext&)>;

struct Box {
    std::vector<double> low;
    std::vector<double> high;

    std::size_t dim() const noexcept { return low.size(); }

    void validate() const {
        if (low.empty() || low.size() != high.size()) throw ConfigError("search box: low/high length mismatch");
        for (std::size_t i = 0; i < low.size(); ++i)
            if (!(low[i] < high[i])) throw ConfigError("search box: low >= high in dimension " + std::to_string(i));
    }

    void clamp(std::span<double> x) const noexcept {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], low[i], high[i]);
    }

    bool contains(std::span<const double> x) const noexcept {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < low[i] || x[i] > high[i]) return false;
        return true;
    }

    static Box uniform(std::size_t dim, double lo, double hi) {
        return {std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
    }
};

struct Individual {
    std::vector<double> genome;
    double fitness = -std::numeric_limits<double>::infinity();
};

struct HistoryRecord {
    std::size_t generation = 0;
    long long episodes = 0;
    double best = 0.0;
    double mean = 0.0;
    double std = 0.0;
};

struct SearchState {
    std::vector<Individual> population;
    Individual incumbent;
    std::size_t generation = 0;
    long long evaluations = 0;
    long long episodes = 0;
    int episodes_per_eval = 1;
    std::vector<HistoryRecord> history;
    std::vector<double> episode_scores;
    Rng rng;
};

enum class Strategy { rand_1_bin, best_1_bin };

inline std::string to_string(Strategy s) { return s == Strategy::rand_1_bin ? "rand-1-bin" : "best-1-bin"; }

inline Strategy strategy_from_string(const std::string& s) {
    if (s == "rand-1-bin") return Strategy::rand_1_bin;
    if (s == "best-1-bin") return Strategy::best_1_bin;
    throw ConfigError("unknown DE strategy '" + s + "'");
}

struct DeConfig {
    std::size_t population_size = 30;
    double weight = 0.8;
    double crossover = 0.9;
    Strategy strategy = Strategy::rand_1_bin;

    void validate() const {
        if (population_size < 4) throw ConfigError("DE: population size must be at least 4");
        if (!(weight >= 0.0 && weight <= 2.0)) throw ConfigError("DE: weight must lie in [0, 2]");
        if (!(crossover >= 0.0 && crossover <= 1.0)) throw ConfigError("DE: crossover rate must lie in [0, 1]");
    }
};

/// Gaussian perturbations of the incumbent, sigma relative to the box width.
struct LocalSearchConfig {
    std::size_t samples = 30;
    double sigma = 0.1;

    void validate() const {
        if (samples < 1) throw ConfigError("local search: samples must be >= 1");
        if (!(sigma > 0.0)) throw ConfigError("local search: sigma must be positive");
    }
};

namespace detail {

inline std::vector<Evaluation> evaluate_all(const Objective& f, const std::vector<std::vector<double>>& xs,
                                            std::size_t generation, unsigned threads) {
    std::vector<Evaluation> out(xs.size());
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < xs.size(); i += stride) out[i] = f(xs[i], {generation, i});
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(xs.size())));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    }
    return out;
}

/// Book-keeping after a batch of evaluations, in slot order.
inline void account(SearchState& s, const std::vector<std::vector<double>>& xs, std::vector<Evaluation>& evals) {
    for (std::size_t i = 0; i < evals.size(); ++i) {
        s.evaluations += 1;
        s.episodes += s.episodes_per_eval;
        s.episode_scores.insert(s.episode_scores.end(), evals[i].episode_scores.begin(),
                                evals[i].episode_scores.end());
        if (evals[i].fitness >= s.incumbent.fitness) s.incumbent = {xs[i], evals[i].fitness};
    }
}

inline void record(SearchState& s) {
    HistoryRecord h;
    h.generation = s.generation;
    h.episodes = s.episodes;
    h.best = s.incumbent.fitness;
    double sum = 0.0;
    for (const auto& ind : s.population) sum += ind.fitness;
    const double n = static_cast<double>(s.population.size());
    h.mean = n > 0 ? sum / n : 0.0;
    double ss = 0.0;
    for (const auto& ind : s.population) ss += (ind.fitness - h.mean) * (ind.fitness - h.mean);
    h.std = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    s.history.push_back(h);
}

}  // namespace detail

/// Generation 0: `size` uniform draws in the box, the first optionally replaced by `seed_member`.
inline SearchState initialize_population(const Objective& f, const Box& box, std::size_t size, std::uint64_t seed,
                                         int episodes_per_eval, const std::optional<std::vector<double>>& seed_member = {},
                                         unsigned threads = 1) {
    box.validate();
    if (size < 1) throw ConfigError("search: population size must be >= 1");
    SearchState s;
    s.rng.seed(seed);
    s.episodes_per_eval = episodes_per_eval;
    std::vector<std::vector<double>> xs(size, std::vector<double>(box.dim()));
    for (auto& x : xs)
        for (std::size_t d = 0; d < box.dim(); ++d)
            x[d] = std::uniform_real_distribution<double>(box.low[d], box.high[d])(s.rng);
    if (seed_member) {
        if (seed_member->size() != box.dim()) throw ConfigError("search: initial genome has the wrong length");
        xs[0] = *seed_member;
        box.clamp(xs[0]);
    }
    auto evals = detail::evaluate_all(f, xs, 0, threads);
    detail::account(s, xs, evals);
    for (std::size_t i = 0; i < size; ++i) s.population.push_back({xs[i], evals[i].fitness});
    detail::record(s);
    return s;
}

/// One DE generation: exactly NP objective evaluations. A trial replaces its
/// target when its fitness is at least the target's.
inline void de_generation(SearchState& s, const Objective& f, const DeConfig& cfg, const Box& box,
                          unsigned threads = 1) {
    cfg.validate();
    const std::size_t np = s.population.size();
    if (np != cfg.population_size) throw ConfigError("DE: population size differs from configuration");
    const std::size_t dim = box.dim();
    std::size_t best = 0;
    for (std::size_t i = 1; i < np; ++i)
        if (s.population[i].fitness > s.population[best].fitness) best = i;

    std::uniform_int_distribution<std::size_t> pick(0, np - 1);
    std::uniform_int_distribution<std::size_t> pick_gene(0, dim - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> trials(np, std::vector<double>(dim));
    for (std::size_t i = 0; i < np; ++i) {
        std::size_t r1, r2, r3;
        do r1 = pick(s.rng); while (r1 == i);
        do r2 = pick(s.rng); while (r2 == i || r2 == r1);
        do r3 = pick(s.rng); while (r3 == i || r3 == r1 || r3 == r2);
        const auto& base = cfg.strategy == Strategy::rand_1_bin ? s.population[r1].genome : s.population[best].genome;
        const auto& a = cfg.strategy == Strategy::rand_1_bin ? s.population[r2].genome : s.population[r1].genome;
        const auto& b = cfg.strategy == Strategy::rand_1_bin ? s.population[r3].genome : s.population[r2].genome;
        const std::size_t forced = pick_gene(s.rng);
        auto& trial = trials[i];
        for (std::size_t d = 0; d < dim; ++d) {
            const bool cross = unit(s.rng) < cfg.crossover || d == forced;
            trial[d] = cross ? base[d] + cfg.weight * (a[d] - b[d]) : s.population[i].genome[d];
        }
        box.clamp(trial);
    }
    s.generation += 1;
    auto evals = detail::evaluate_all(f, trials, s.generation, threads);
    detail::account(s, trials, evals);
    for (std::size_t i = 0; i < np; ++i)
        if (evals[i].fitness >= s.population[i].fitness) s.population[i] = {std::move(trials[i]), evals[i].fitness};
    detail::record(s);
}

/// One random-local-search generation around the incumbent; the population is
/// the incumbent alone and is replaced by the best sample if it is at least as good.
inline void local_search_generation(SearchState& s, const Objective& f, const LocalSearchConfig& cfg, const Box& box,
                                    unsigned threads = 1) {
    cfg.validate();
    const std::size_t dim = box.dim();
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<std::vector<double>> xs(cfg.samples, s.incumbent.genome);
    for (auto& x : xs) {
        for (std::size_t d = 0; d < dim; ++d) x[d] += cfg.sigma * (box.high[d] - box.low[d]) * n01(s.rng);
        box.clamp(x);
    }
    s.generation += 1;
    auto evals = detail::evaluate_all(f, xs, s.generation, threads);
    detail::account(s, xs, evals);
    s.population = {s.incumbent};
    detail::record(s);
}

/// Unset members never trigger; at least one must be set.
struct StopCriteria {
    std::optional<long long> max_episodes;
    std::optional<std::size_t> max_generations;
    std::optional<double> target_fitness;

    void validate() const {
        if (!max_episodes && !max_generations && !target_fitness)
            throw ConfigError("search: at least one stop criterion is required");
    }
};

enum class Optimizer { differential_evolution, random_local_search };

struct SearchConfig {
    Optimizer optimizer = Optimizer::differential_evolution;
    DeConfig de;
    LocalSearchConfig local;
    unsigned threads = 1;

    std::size_t batch_size() const noexcept {
        return optimizer == Optimizer::differential_evolution ? de.population_size : local.samples;
    }
};

struct SearchResult {
    Individual best;
    std::vector<HistoryRecord> history;
    SearchState state;
};

/// Stops when the target is reached, the generation cap is hit, or the next
/// generation would exceed the episode budget.
inline SearchResult run_search(const Objective& f, const Box& box, const SearchConfig& cfg, const StopCriteria& stop,
                               std::uint64_t seed, int episodes_per_eval = 1,
                               const std::optional<std::vector<double>>& seed_member = {}) {
    stop.validate();
    if (cfg.optimizer == Optimizer::differential_evolution) cfg.de.validate();
    else cfg.local.validate();
    const std::size_t init_size = cfg.optimizer == Optimizer::differential_evolution ? cfg.de.population_size : 1;
    const long long per_gen = static_cast<long long>(cfg.batch_size()) * episodes_per_eval;
    if (stop.max_episodes && static_cast<long long>(init_size) * episodes_per_eval > *stop.max_episodes)
        throw ConfigError("search: episode budget smaller than the initial population");

    SearchState s = initialize_population(f, box, init_size, seed, episodes_per_eval, seed_member, cfg.threads);
    auto done = [&] {
        if (stop.target_fitness && s.incumbent.fitness >= *stop.target_fitness) return true;
        if (stop.max_generations && s.generation >= *stop.max_generations) return true;
        if (stop.max_episodes && s.episodes + per_gen > *stop.max_episodes) return true;
        return false;
    };
    while (!done()) {
        if (cfg.optimizer == Optimizer::differential_evolution) de_generation(s, f, cfg.de, box, cfg.threads);
        else local_search_generation(s, f, cfg.local, box, cfg.threads);
    }
    return {s.incumbent, s.history, std::move(s)};
}

}  // namespace cbrl::search
