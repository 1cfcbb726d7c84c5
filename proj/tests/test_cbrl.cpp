#include <cbrl/controllers/presets.hpp>
#include <cbrl/envs/episode.hpp>
#include <cbrl/search/cbrl.hpp>
#include <cbrl/search/io.hpp>

#include <gtest/gtest.h>

#include <map>
#include <mutex>
#include <sstream>

using namespace cbrl;
using namespace cbrl::search;

namespace {

Evaluation neg_sphere(std::span<const double> x, const EvalContext&) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return {-s, {-s}};
}

// Records every genome handed to the objective, keyed by (generation, slot).
struct Recorder {
    std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> seen;
    std::mutex mu;
    Objective objective() {
        return [this](std::span<const double> x, const EvalContext& ctx) {
            std::lock_guard lock(mu);
            seen[{ctx.generation, ctx.slot}] = {x.begin(), x.end()};
            return neg_sphere(x, ctx);
        };
    }
};

DeConfig de(double weight, double crossover, std::size_t np = 10) {
    DeConfig c;
    c.population_size = np;
    c.weight = weight;
    c.crossover = crossover;
    return c;
}

}  // namespace

TEST(Fitness, SingleEpisodeEqualsRunEpisode) {
    const auto env = envs::make_environment("cartpole");
    const auto spec = controllers::make_preset("linear", env->spec());
    const std::vector<double> g{0.3, -0.2, 1.5, 0.4, 0.1};
    FitnessConfig cfg;
    cfg.episodes = 1;
    cfg.base_seed = 42;
    const controllers::ControlPolicy pol(spec, g, env->spec());
    const auto direct = envs::run_episode(*env, pol, cfg.episode_seed(0, {}));
    EXPECT_EQ(fitness(*env, spec, g, cfg), direct.total_reward);
}

TEST(Fitness, ConstantScoresAverageToThemselves) {
    const auto env = envs::make_environment("mountaincar");
    const auto spec = controllers::make_preset("linear", env->spec());
    FitnessConfig cfg;
    cfg.episodes = 3;
    const auto ev = evaluate_controller(*env, spec, std::vector<double>{0.0, 0.0, 0.0}, cfg);
    EXPECT_EQ(ev.fitness, -200.0);
    EXPECT_EQ(ev.episode_scores, (std::vector<double>{-200.0, -200.0, -200.0}));
    cfg.episodes = 0;
    EXPECT_THROW(fitness(*env, spec, std::vector<double>{0.0, 0.0, 0.0}, cfg), ConfigError);
}

TEST(Fitness, SeedPolicies) {
    FitnessConfig fixed;
    EXPECT_EQ(fixed.episode_seed(2, {0, 0}), fixed.episode_seed(2, {7, 3}));
    EXPECT_NE(fixed.episode_seed(1, {}), fixed.episode_seed(2, {}));
    FitnessConfig fresh;
    fresh.seed_policy = SeedPolicy::fresh_per_generation;
    EXPECT_NE(fresh.episode_seed(2, {0, 0}), fresh.episode_seed(2, {1, 0}));
    EXPECT_NE(fresh.episode_seed(2, {1, 0}), fresh.episode_seed(2, {1, 1}));
}

TEST(DifferentialEvolution, FullCrossoverGivesMutant) {
    Recorder rec;
    const auto f = rec.objective();
    const auto box = Box::uniform(4, -100.0, 100.0);
    auto s = initialize_population(f, Box::uniform(4, -1.0, 1.0), 10, 3, 1);
    const auto before = s.population;
    de_generation(s, f, de(0.5, 1.0), box);
    for (std::size_t i = 0; i < 10; ++i) {
        const auto& trial = rec.seen.at({1, i});
        bool found = false;
        for (std::size_t a = 0; a < 10 && !found; ++a)
            for (std::size_t b = 0; b < 10 && !found; ++b)
                for (std::size_t c = 0; c < 10 && !found; ++c) {
                    if (a == i || b == i || c == i || a == b || a == c || b == c) continue;
                    bool eq = true;
                    for (std::size_t d = 0; d < 4; ++d)
                        eq = eq && trial[d] == before[a].genome[d] + 0.5 * (before[b].genome[d] - before[c].genome[d]);
                    found = eq;
                }
        EXPECT_TRUE(found) << "slot " << i;
    }
}

TEST(DifferentialEvolution, ZeroWeightRecombinesOtherMember) {
    Recorder rec;
    const auto f = rec.objective();
    const auto box = Box::uniform(3, -5.0, 5.0);
    auto s = initialize_population(f, box, 8, 5, 1);
    const auto before = s.population;
    de_generation(s, f, de(0.0, 1.0, 8), box);
    for (std::size_t i = 0; i < 8; ++i) {
        const auto& trial = rec.seen.at({1, i});
        bool found = false;
        for (std::size_t r = 0; r < 8; ++r)
            if (r != i && trial == before[r].genome) found = true;
        EXPECT_TRUE(found) << "slot " << i;
    }
}

TEST(DifferentialEvolution, ZeroCrossoverChangesExactlyOneGene) {
    Recorder rec;
    const auto f = rec.objective();
    const auto box = Box::uniform(6, -5.0, 5.0);
    auto s = initialize_population(f, box, 10, 9, 1);
    const auto before = s.population;
    de_generation(s, f, de(0.8, 0.0), box);
    for (std::size_t i = 0; i < 10; ++i) {
        const auto& trial = rec.seen.at({1, i});
        int changed = 0;
        for (std::size_t d = 0; d < 6; ++d) changed += trial[d] != before[i].genome[d];
        EXPECT_LE(changed, 1);
    }
}

TEST(DifferentialEvolution, ExactlyNpEvaluationsAndGreedySelection) {
    Recorder rec;
    const auto f = rec.objective();
    const auto box = Box::uniform(3, -5.0, 5.0);
    auto s = initialize_population(f, box, 12, 1, 5);
    EXPECT_EQ(s.evaluations, 12);
    EXPECT_EQ(s.episodes, 60);
    const auto before = s.population;
    de_generation(s, f, de(0.8, 0.9, 12), box);
    EXPECT_EQ(s.evaluations, 24);
    EXPECT_EQ(s.episodes, 120);
    EXPECT_EQ(rec.seen.size(), 24u);
    for (std::size_t i = 0; i < 12; ++i) {
        const double trial_fit = neg_sphere(rec.seen.at({1, i}), {}).fitness;
        EXPECT_EQ(s.population[i].fitness, std::max(trial_fit, before[i].fitness));
    }
}

TEST(DifferentialEvolution, Validation) {
    const auto box = Box::uniform(2, -1.0, 1.0);
    auto s = initialize_population(neg_sphere, box, 3, 1, 1);
    EXPECT_THROW(de_generation(s, neg_sphere, de(0.8, 0.9, 3), box), ConfigError);
    EXPECT_THROW(de(2.5, 0.9).validate(), ConfigError);
    EXPECT_THROW(de(0.8, 1.5).validate(), ConfigError);
    EXPECT_THROW(initialize_population(neg_sphere, Box{{0.0}, {0.0}}, 4, 1, 1), ConfigError);
    EXPECT_EQ(strategy_from_string("best-1-bin"), Strategy::best_1_bin);
    EXPECT_THROW(strategy_from_string("rand-2-exp"), ConfigError);
}

TEST(DifferentialEvolution, SphereSelfTest) {
    SearchConfig cfg;
    StopCriteria stop;
    stop.max_generations = 200;
    for (auto strategy : {Strategy::rand_1_bin, Strategy::best_1_bin}) {
        cfg.de.strategy = strategy;
        const auto r = run_search(neg_sphere, Box::uniform(5, -5.0, 5.0), cfg, stop, 17);
        EXPECT_GE(r.best.fitness, -1e-6) << to_string(strategy);
        EXPECT_EQ(r.state.evaluations, 30 * 201);
    }
}

TEST(RunSearch, TargetAtGenerationZeroReturnsImmediately) {
    StopCriteria stop;
    stop.target_fitness = -1e9;
    const auto r = run_search(neg_sphere, Box::uniform(3, -5.0, 5.0), {}, stop, 1);
    EXPECT_EQ(r.state.generation, 0u);
    EXPECT_EQ(r.state.evaluations, 30);
    ASSERT_EQ(r.history.size(), 1u);
    EXPECT_EQ(r.history[0].best, r.best.fitness);
}

TEST(RunSearch, MonotoneIncumbentBudgetAndBounds) {
    bool inside = true;
    const auto box = Box::uniform(4, -2.0, 3.0);
    const Objective f = [&](std::span<const double> x, const EvalContext& ctx) {
        inside = inside && box.contains(x);
        return neg_sphere(x, ctx);
    };
    StopCriteria stop;
    stop.max_episodes = 30 * 3 * 7 + 10;
    const auto r = run_search(f, box, {}, stop, 4, 3);
    EXPECT_TRUE(inside);
    EXPECT_EQ(r.state.generation, 6u);
    EXPECT_EQ(r.state.episodes, 30 * 3 * 7);
    EXPECT_EQ(r.state.evaluations, 30 * 7);
    for (std::size_t g = 1; g < r.history.size(); ++g) {
        EXPECT_GE(r.history[g].best, r.history[g - 1].best);
        EXPECT_EQ(r.history[g].episodes, static_cast<long long>(30 * 3 * (g + 1)));
    }
    EXPECT_EQ(r.state.episode_scores.size(), static_cast<std::size_t>(30 * 7));
}

TEST(RunSearch, StopValidation) {
    EXPECT_THROW(run_search(neg_sphere, Box::uniform(2, -1.0, 1.0), {}, {}, 1), ConfigError);
    StopCriteria tiny;
    tiny.max_episodes = 10;
    EXPECT_THROW(run_search(neg_sphere, Box::uniform(2, -1.0, 1.0), {}, tiny, 1), ConfigError);
}

TEST(RunSearch, Deterministic) {
    StopCriteria stop;
    stop.max_generations = 20;
    const auto a = run_search(neg_sphere, Box::uniform(3, -5.0, 5.0), {}, stop, 99);
    const auto b = run_search(neg_sphere, Box::uniform(3, -5.0, 5.0), {}, stop, 99);
    EXPECT_EQ(a.best.genome, b.best.genome);
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t g = 0; g < a.history.size(); ++g) EXPECT_EQ(a.history[g].mean, b.history[g].mean);
}

TEST(RunSearch, SeedMemberIsClampedIntoPopulation) {
    StopCriteria stop;
    stop.max_generations = 0;
    const auto r = run_search(neg_sphere, Box::uniform(2, -1.0, 1.0), {}, stop, 1, 1, std::vector<double>{0.0, 5.0});
    EXPECT_EQ(r.state.population[0].genome, (std::vector<double>{0.0, 1.0}));
    EXPECT_THROW(run_search(neg_sphere, Box::uniform(2, -1.0, 1.0), {}, stop, 1, 1, std::vector<double>{0.0}),
                 ConfigError);
}

TEST(RunSearch, LocalSearchImproves) {
    SearchConfig cfg;
    cfg.optimizer = Optimizer::random_local_search;
    cfg.local.sigma = 0.02;
    StopCriteria stop;
    stop.max_generations = 100;
    const auto r = run_search(neg_sphere, Box::uniform(3, -5.0, 5.0), cfg, stop, 8);
    EXPECT_GT(r.best.fitness, r.history.front().best);
    EXPECT_EQ(r.state.evaluations, 1 + 100 * 30);
    for (std::size_t g = 1; g < r.history.size(); ++g) EXPECT_GE(r.history[g].best, r.history[g - 1].best);
}

TEST(Checkpoint, ResumeMatchesUninterruptedRun) {
    const auto box = Box::uniform(3, -5.0, 5.0);
    const DeConfig cfg = de(0.8, 0.9, 10);
    auto a = initialize_population(neg_sphere, box, 10, 5, 2);
    for (int g = 0; g < 3; ++g) de_generation(a, neg_sphere, cfg, box);
    auto b = checkpoint_from_json(nlohmann::json::parse(checkpoint_json(a).dump()));
    EXPECT_EQ(b.generation, 3u);
    EXPECT_EQ(b.history.size(), 4u);
    for (int g = 0; g < 4; ++g) {
        de_generation(a, neg_sphere, cfg, box);
        de_generation(b, neg_sphere, cfg, box);
    }
    EXPECT_EQ(a.incumbent.genome, b.incumbent.genome);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.population[i].genome, b.population[i].genome);
    EXPECT_EQ(a.episodes, b.episodes);
    EXPECT_THROW(checkpoint_from_json(nlohmann::json{{"generation", 1}}), ConfigError);
}

TEST(HistoryCsv, HeaderAndRows) {
    std::ostringstream os;
    write_history_csv(os, {{0, 150, -3.5, -10.0, 2.0}, {1, 300, -1.0, -6.0, 1.5}});
    EXPECT_EQ(os.str(), "# cbrl-history v1\ngeneration,episodes,best,mean,std\n0,150,-3.5,-10,2\n1,300,-1,-6,1.5\n");
}

TEST(CbrlSearch, ThreadedMatchesSingleThreaded) {
    const auto env = envs::make_environment("cartpole");
    const auto spec = controllers::make_preset("linear", env->spec());
    FitnessConfig fit;
    fit.base_seed = 3;
    fit.seed_policy = SeedPolicy::fresh_per_generation;
    StopCriteria stop;
    stop.max_generations = 3;
    SearchConfig one, four;
    four.threads = 4;
    const auto a = cbrl_search(*env, spec, fit, one, stop, 11);
    const auto b = cbrl_search(*env, spec, fit, four, stop, 11);
    EXPECT_EQ(a.best.genome, b.best.genome);
    EXPECT_EQ(a.state.episode_scores, b.state.episode_scores);
}

TEST(CbrlSearch, CartPoleLinearSolvesWithinAFewHundredEpisodes) {
    const auto env = envs::make_environment("cartpole");
    const auto spec = controllers::make_preset("linear", env->spec());
    FitnessConfig fit;
    fit.base_seed = derive_seed(1, {seed_tag::fitness});
    StopCriteria stop;
    stop.max_episodes = 2000;
    stop.target_fitness = 200.0;
    const auto r = cbrl_search(*env, spec, fit, {}, stop, 1);
    EXPECT_EQ(r.best.fitness, 200.0);
    EXPECT_LE(r.state.episodes, 600);
    EXPECT_EQ(r.state.episodes, static_cast<long long>(r.state.evaluations) * 5);
}

TEST(CbrlSearch, BridgeRecordsReturnToGo) {
    const auto env = envs::make_environment("mountaincar");
    const auto spec = controllers::make_preset("pwl2", env->spec());
    FitnessConfig fit;
    fit.episodes = 1;
    MdpBridge bridge;
    const auto ev = evaluate_controller(*env, spec, std::vector<double>(spec.genome_length(), 0.0), fit, {}, &bridge, 7);
    const auto snap = bridge.snapshot();
    long long count = 0;
    for (const auto& [key, e] : snap) {
        EXPECT_EQ(key.second, 7);
        EXPECT_LT(key.first, 2u);
        count += e.count;
    }
    EXPECT_EQ(count, 200);
    EXPECT_EQ(ev.fitness, -200.0);
    // A start state at rest with x < 0 sits in region 0 and sees the full -200 return first.
    EXPECT_LE(snap.at({0, 7}).mean, -100.0);
}
