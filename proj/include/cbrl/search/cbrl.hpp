#pragma once

#include <cbrl/controllers/controller.hpp>
#include <cbrl/envs/episode.hpp>
#include <cbrl/error.hpp>
#include <cbrl/random.hpp>
#include <cbrl/search/optimizer.hpp>

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace cbrl::search {

enum class SeedPolicy { fixed_set, fresh_per_generation };

struct FitnessConfig {
    int episodes = 5;
    SeedPolicy seed_policy = SeedPolicy::fixed_set;
    std::uint64_t base_seed = 0;
    controllers::QuantizerThresholds thresholds;

    void validate() const {
        if (episodes < 1) throw ConfigError("fitness: episodes per evaluation must be >= 1");
    }

    /// Seed of episode k. The fixed set ignores the context (common random numbers).
    std::uint64_t episode_seed(int k, const EvalContext& ctx) const noexcept {
        if (seed_policy == SeedPolicy::fixed_set)
            return derive_seed(base_seed, {seed_tag::fitness, static_cast<std::uint64_t>(k)});
        return derive_seed(base_seed, {seed_tag::fitness, ctx.generation, ctx.slot, static_cast<std::uint64_t>(k)});
    }
};

/// Running mean return-to-go per (controller region, evaluated controller).
/// Thread-safe; filled only when passed to the objective.
class MdpBridge {
public:
    struct Entry {
        long long count = 0;
        double mean = 0.0;
    };
    using Key = std::pair<std::size_t, long long>;

    void observe(std::size_t region, long long controller, double return_to_go) {
        std::lock_guard lock(mu_);
        auto& e = table_[{region, controller}];
        e.count += 1;
        e.mean += (return_to_go - e.mean) / static_cast<double>(e.count);
    }

    std::map<Key, Entry> snapshot() const {
        std::lock_guard lock(mu_);
        return table_;
    }

private:
    mutable std::mutex mu_;
    std::map<Key, Entry> table_;
};

/// Mean score over cfg.episodes runs of the quantized controller.
inline Evaluation evaluate_controller(const envs::Environment& env, const controllers::ControllerSpec& spec,
                                     std::span<const double> genome, const FitnessConfig& cfg,
                                     const EvalContext& ctx = {}, MdpBridge* bridge = nullptr,
                                     long long controller_id = 0) {
    cfg.validate();
    const controllers::ControlPolicy policy(spec, genome, env.spec(), cfg.thresholds);
    Evaluation ev;
    ev.episode_scores.reserve(static_cast<std::size_t>(cfg.episodes));
    double sum = 0.0;
    for (int k = 0; k < cfg.episodes; ++k) {
        const auto out = envs::run_episode(env, policy, cfg.episode_seed(k, ctx), bridge != nullptr);
        if (bridge) {
            double g = out.total_reward;
            for (const auto& row : *out.trace) {
                bridge->observe(spec.partition.region(row.state), controller_id, g);
                g -= row.reward;
            }
        }
        sum += out.total_reward;
        ev.episode_scores.push_back(out.total_reward);
    }
    ev.fitness = sum / cfg.episodes;
    return ev;
}

inline double fitness(const envs::Environment& env, const controllers::ControllerSpec& spec,
                      std::span<const double> genome, const FitnessConfig& cfg, const EvalContext& ctx = {}) {
    return evaluate_controller(env, spec, genome, cfg, ctx).fitness;
}

/// Direct policy search over controller genomes.
inline SearchResult cbrl_search(const envs::Environment& env, const controllers::ControllerSpec& spec,
                                const FitnessConfig& fit, const SearchConfig& cfg, const StopCriteria& stop,
                                std::uint64_t seed, const std::optional<std::vector<double>>& initial = {},
                                MdpBridge* bridge = nullptr) {
    spec.validate();
    fit.validate();
    stop.validate();
    if (spec.state_dim != env.spec().state_dim) throw ConfigError("cbrl: controller and environment state dims differ");
    const std::size_t batch = cfg.batch_size();
    Objective f = [&](std::span<const double> g, const EvalContext& ctx) {
        const long long id = static_cast<long long>(ctx.generation * batch + ctx.slot);
        return evaluate_controller(env, spec, g, fit, ctx, bridge, id);
    };
    Box box{spec.lower_bounds(), spec.upper_bounds()};
    return run_search(f, box, cfg, stop, derive_seed(seed, {seed_tag::search}), fit.episodes, initial);
}

}  // namespace cbrl::search
