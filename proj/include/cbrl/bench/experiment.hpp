#pragma once

#include <cbrl/baseline/qlbo.hpp>
#include <cbrl/bench/config.hpp>
#include <cbrl/bench/stats.hpp>
#include <cbrl/controllers/genome_io.hpp>
#include <cbrl/controllers/presets.hpp>
#include <cbrl/envs/episode.hpp>
#include <cbrl/random.hpp>
#include <cbrl/search/cbrl.hpp>
#include <cbrl/search/io.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace cbrl::bench {

struct TrialResult {
    int trial = 0;
    std::vector<double> train_curve;
    std::vector<double> test_scores;
    long long train_episodes = 0;
    double train_fitness = 0.0;  // incumbent fitness (cbrl); mean of the last 100 training episodes (qlbo)
    std::optional<std::vector<double>> genome;
    std::optional<search::SearchState> search_state;
    std::optional<baseline::QTable> qtable;
    std::optional<std::map<search::MdpBridge::Key, search::MdpBridge::Entry>> bridge;
    bool completed = false;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<TrialResult> trials;
    double mean = 0.0;
    double ci95 = 0.0;
    double std = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t n_scores = 0;
    double wall_seconds = 0.0;

    std::string label() const {
        return config.method == Method::cbrl ? "cbrl-" + config.controller : std::string("qlbo");
    }

    std::vector<double> all_test_scores() const {
        std::vector<double> out;
        for (const auto& t : trials) out.insert(out.end(), t.test_scores.begin(), t.test_scores.end());
        return out;
    }
};

inline std::uint64_t train_seed(std::uint64_t master, int trial) {
    return derive_seed(master, {seed_tag::train, static_cast<std::uint64_t>(trial)});
}

inline std::uint64_t test_seed(std::uint64_t master, int trial, int episode) {
    return derive_seed(master, {seed_tag::test, static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(episode)});
}

inline controllers::ControllerSpec controller_for(const ExperimentConfig& c, const envs::EnvSpec& env) {
    auto spec = controllers::make_preset(c.controller, env);
    spec.bound_low = c.genome_low;
    spec.bound_high = c.genome_high;
    spec.validate();
    return spec;
}

inline baseline::GridDiscretizer grid_for(const ExperimentConfig& c) {
    if (c.qlbo_bins.empty()) return baseline::default_discretizer(c.env);
    if (!c.qlbo_ranges.empty()) return baseline::GridDiscretizer(c.qlbo_bins, c.qlbo_ranges);
    return baseline::GridDiscretizer(c.qlbo_bins, baseline::default_discretizer(c.env).ranges());
}

template <envs::Policy P>
std::vector<double> test_policy(const envs::Environment& env, const P& policy, std::uint64_t master, int trial,
                                int episodes) {
    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(episodes));
    for (int e = 0; e < episodes; ++e)
        scores.push_back(envs::run_episode(env, policy, test_seed(master, trial, e)).total_reward);
    return scores;
}

/// Train one trial and evaluate the frozen result on the test seeds.
inline TrialResult run_trial(const ExperimentConfig& c, const envs::Environment& env, int trial) {
    TrialResult r;
    r.trial = trial;
    const auto seed = train_seed(c.seed, trial);
    if (c.method == Method::cbrl) {
        const auto spec = controller_for(c, env.spec());
        auto fit = c.fitness;
        fit.base_seed = seed;
        search::StopCriteria stop;
        stop.max_episodes = c.budget();
        stop.max_generations = c.max_generations;
        stop.target_fitness = c.target_fitness;
        std::optional<std::vector<double>> initial;
        if (!c.init_genome.empty()) {
            std::ifstream in(c.init_genome);
            if (!in) throw ConfigError("cannot read " + c.init_genome);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError(c.init_genome + ": " + e.what());
            }
            initial = controllers::genome_from_json(j).genome;
        }
        search::MdpBridge bridge;
        auto res = search::cbrl_search(env, spec, fit, c.search, stop, seed, initial, c.bridge ? &bridge : nullptr);
        r.train_curve = res.state.episode_scores;
        r.train_episodes = res.state.episodes;
        r.train_fitness = res.best.fitness;
        const controllers::ControlPolicy policy(spec, res.best.genome, env.spec(), c.fitness.thresholds);
        r.test_scores = test_policy(env, policy, c.seed, trial, c.test_episodes);
        r.genome = res.best.genome;
        r.search_state = std::move(res.state);
        if (c.bridge) r.bridge = bridge.snapshot();
    } else {
        const auto grid = grid_for(c);
        auto res = baseline::train_qlbo(env, grid, c.qlbo, c.budget(), seed);
        r.train_curve = res.curve;
        r.train_episodes = static_cast<long long>(res.curve.size());
        if (!res.curve.empty()) {
            const std::size_t n = std::min<std::size_t>(100, res.curve.size());
            r.train_fitness = mean(std::span<const double>(res.curve).last(n));
        }
        const baseline::GreedyQPolicy policy(res.table, grid);
        r.test_scores = test_policy(env, policy, c.seed, trial, c.test_episodes);
        r.qtable = std::move(res.table);
    }
    r.completed = true;
    return r;
}

inline void summarize(ExperimentReport& rep) {
    const auto scores = rep.all_test_scores();
    rep.n_scores = scores.size();
    if (scores.empty()) return;
    rep.mean = mean(scores);
    rep.std = sample_std(scores);
    rep.ci95 = ci95_half_width(scores);
    rep.min = *std::min_element(scores.begin(), scores.end());
    rep.max = *std::max_element(scores.begin(), scores.end());
}

inline void write_outputs(const ExperimentReport& rep, const std::filesystem::path& dir);

/// All trials, optionally in parallel (config.threads). Trial results do not
/// depend on scheduling. With an output directory, whatever finished is
/// written there before an error propagates.
inline ExperimentReport run_experiment(const ExperimentConfig& c) {
    c.validate();
    const auto env = envs::make_environment(c.env, c.physics);
    if (c.method == Method::cbrl) (void)controller_for(c, env->spec());
    else (void)grid_for(c);

    ExperimentReport rep;
    rep.config = c;
    rep.trials.resize(static_cast<std::size_t>(c.trials));
    const auto t0 = std::chrono::steady_clock::now();
    std::exception_ptr failure;
    std::mutex mu;
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int t = next++; t < c.trials; t = next++) {
            try {
                rep.trials[static_cast<std::size_t>(t)] = run_trial(c, *env, t);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    const unsigned n_threads = std::min<unsigned>(c.threads, static_cast<unsigned>(c.trials));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (failure) {
        std::erase_if(rep.trials, [](const TrialResult& t) { return !t.completed; });
        summarize(rep);
        if (!c.output_dir.empty()) write_outputs(rep, c.output_dir);
        std::rethrow_exception(failure);
    }
    summarize(rep);
    return rep;
}

}  // namespace cbrl::bench

#include <cbrl/bench/report.hpp>
