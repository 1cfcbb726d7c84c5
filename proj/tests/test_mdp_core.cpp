#include "oracles.hpp"

#include <cbrl/mdp/aggregate.hpp>
#include <cbrl/mdp/discrete_mdp.hpp>
#include <cbrl/mdp/neighborhood.hpp>
#include <cbrl/mdp/operators.hpp>
#include <cbrl/mdp/policy_family.hpp>
#include <cbrl/mdp/random_mdp.hpp>
#include <cbrl/mdp/serialize.hpp>
#include <cbrl/mdp/theory_checks.hpp>
#include <cbrl/mdp/value_iteration.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace cbrl;
using namespace cbrl::mdp;

namespace {

DiscreteMdp two_state_cycle(double gamma) {
    // 0 -> 1 -> 0, reward 1 everywhere.
    return DiscreteMdp(2, 1, {0, 1, 1, 0}, {1, 1, 1, 1}, gamma);
}

double max_over_family(const FamilyQFunction& q, std::size_t x) {
    double best = q(x, 0);
    for (std::size_t c = 1; c < q.n_policies(); ++c) best = std::max(best, q(x, c));
    return best;
}

}  // namespace

TEST(DiscreteMdp, RejectsRowsNotSummingToOne) {
    EXPECT_THROW(DiscreteMdp(1, 1, {0.9}, {0.0}, 0.5), ConfigError);
    EXPECT_THROW(DiscreteMdp(1, 1, {1.0}, {0.0}, 1.0), ConfigError);
    EXPECT_THROW(DiscreteMdp(1, 1, {1.0}, {INFINITY}, 0.5), ConfigError);
    EXPECT_THROW(DiscreteMdp(2, 1, {1.2, -0.2, 0, 1}, {0, 0, 0, 0}, 0.5), ConfigError);
    EXPECT_THROW(DiscreteMdp(2, 1, {1.0}, {0.0}, 0.5), ConfigError);
    EXPECT_NO_THROW(DiscreteMdp(2, 1, {0.5 + 5e-13, 0.5, 0.5, 0.5}, {0, 0, 0, 0}, 0.5));
}

TEST(DiscreteMdp, JsonRoundTrip) {
    const auto m = random_mdp(3, 2, 0.7, 11);
    const auto j = to_json(m);
    EXPECT_EQ(j.at("n_states"), 3);
    EXPECT_EQ(j.at("P").size(), 18u);
    EXPECT_EQ(mdp_from_json(j), m);
    EXPECT_THROW(mdp_from_json(nlohmann::json{{"n_states", 1}}), ConfigError);
}

TEST(PolicyFamily, EnumeratesAllDeterministicPolicies) {
    const auto f = PolicyFamily::all_deterministic(3, 2);
    EXPECT_EQ(f.size(), 8u);
    EXPECT_EQ(f.action(1, 0), 1u);
    EXPECT_EQ(f.action(1, 1), 0u);
    EXPECT_EQ(f.action(7, 2), 1u);
    EXPECT_THROW(PolicyFamily(2, 2, {{0, 2}}), ConfigError);
    EXPECT_THROW(PolicyFamily(2, 2, {}), ConfigError);
}

TEST(Neighborhood, SingletonReturnsEntryForEveryKind) {
    FamilyQFunction q(2, 1);
    q(0, 0) = 2.5;
    q(1, 0) = -7.0;
    for (auto kind : {NeighborhoodKind::max, NeighborhoodKind::min, NeighborhoodKind::average})
        EXPECT_EQ(apply_neighborhood(q, 0, 0, NeighborhoodMap::singleton(2, kind)), 2.5);
}

TEST(Neighborhood, MaxMinAverageOverPair) {
    FamilyQFunction q(2, 1);
    q(0, 0) = 1.0;
    q(1, 0) = 3.0;
    const std::vector<std::vector<std::size_t>> nu{{0, 1}, {1}};
    EXPECT_EQ(apply_neighborhood(q, 0, 0, NeighborhoodMap(nu, NeighborhoodKind::max)), 3.0);
    EXPECT_EQ(apply_neighborhood(q, 0, 0, NeighborhoodMap(nu, NeighborhoodKind::min)), 1.0);
    EXPECT_DOUBLE_EQ(apply_neighborhood(q, 0, 0, NeighborhoodMap(nu, NeighborhoodKind::average)), 2.0);
}

TEST(Neighborhood, AveragePointMeasure) {
    FamilyQFunction q(2, 1);
    q(0, 0) = -4.0;
    q(1, 0) = 100.0;
    const NeighborhoodMap map({{0, 1}, {1}}, NeighborhoodKind::average, {{1.0, 0.0}, {1.0}});
    EXPECT_EQ(apply_neighborhood(q, 0, 0, map), -4.0);
}

TEST(Neighborhood, Validation) {
    EXPECT_THROW(NeighborhoodMap({{1}, {1}}, NeighborhoodKind::max), ConfigError);
    EXPECT_THROW(NeighborhoodMap({{0}, {1}}, NeighborhoodKind::average, {{0.5}, {1.0}}), ConfigError);
    EXPECT_THROW(NeighborhoodMap({{0}, {1}}, NeighborhoodKind::average, {{-0.5}, {1.0}}), ConfigError);
    EXPECT_THROW(NeighborhoodMap({{0}, {1}}, NeighborhoodKind::max, {{1.0}, {1.0}}), ConfigError);
    EXPECT_THROW(Partition({0, 2}), ConfigError);
    FamilyQFunction q(3, 1);
    EXPECT_THROW(apply_neighborhood(q, 0, 0, NeighborhoodMap::singleton(2)), ConfigError);
}

TEST(Neighborhood, SharedNeighborhoodGivesEqualValues) {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto part = random_partition(6, 3, rng);
        for (auto kind : {NeighborhoodKind::max, NeighborhoodKind::min, NeighborhoodKind::average}) {
            const auto map = kind == NeighborhoodKind::average
                                 ? NeighborhoodMap::from_partition(part, kind, random_zeta(part, rng))
                                 : NeighborhoodMap::from_partition(part, kind);
            FamilyQFunction q(6, 3);
            std::uniform_real_distribution<double> u(-5, 5);
            for (std::size_t x = 0; x < 6; ++x)
                for (std::size_t c = 0; c < 3; ++c) q(x, c) = u(rng);
            for (std::size_t x = 0; x < 6; ++x)
                for (std::size_t y = 0; y < 6; ++y)
                    if (part.region_of(x) == part.region_of(y)) {
                        for (std::size_t c = 0; c < 3; ++c)
                            EXPECT_EQ(apply_neighborhood(q, x, c, map), apply_neighborhood(q, y, c, map));
                    }
        }
    }
}

TEST(BellmanTNu, GammaZeroGivesExpectedReward) {
    const auto m = random_mdp(4, 2, 0.0, 3);
    const auto f = PolicyFamily::all_deterministic(4, 2);
    FamilyQFunction q(4, f.size(), 3.0);
    const auto out = bellman_t_nu(q, m, f, NeighborhoodMap::singleton(4));
    for (std::size_t x = 0; x < 4; ++x)
        for (std::size_t c = 0; c < f.size(); ++c) EXPECT_NEAR(out(x, c), m.expected_reward(x, f.action(c, x)), 1e-15);
    EXPECT_EQ(q(0, 0), 3.0);
}

TEST(BellmanTNu, HandEvaluatedCycle) {
    const auto m = two_state_cycle(0.5);
    const auto f = PolicyFamily::all_deterministic(2, 1);
    const auto out = bellman_t_nu(FamilyQFunction(2, 1), m, f, NeighborhoodMap::singleton(2));
    EXPECT_EQ(out(0, 0), 1.0);
    EXPECT_EQ(out(1, 0), 1.0);
}

TEST(BellmanTNu, SingletonMatchesClassicalBackup) {
    const auto m = random_mdp(4, 2, 0.9, 17);
    const auto f = PolicyFamily::all_deterministic(4, 2);
    Rng rng(1);
    std::uniform_real_distribution<double> u(-3, 3);
    // Classical Q table, lifted to the family: q^F(x, C) = q(x, C(x)).
    std::vector<std::vector<double>> q(4, std::vector<double>(2));
    for (auto& row : q)
        for (auto& v : row) v = u(rng);
    FamilyQFunction qf(4, f.size());
    for (std::size_t x = 0; x < 4; ++x)
        for (std::size_t c = 0; c < f.size(); ++c) qf(x, c) = q[x][f.action(c, x)];
    const auto expected = oracle::classical_backup(m, q);
    const auto out = bellman_t_nu(qf, m, f, NeighborhoodMap::singleton(4));
    for (std::size_t x = 0; x < 4; ++x)
        for (std::size_t c = 0; c < f.size(); ++c) EXPECT_NEAR(out(x, c), expected[x][f.action(c, x)], 1e-12);
}

TEST(FixedPoint, GammaZeroTakesTwoIterations) {
    const auto m = random_mdp(3, 2, 0.0, 8);
    const auto f = PolicyFamily::all_deterministic(3, 2);
    const auto r = fixed_point(m, f, NeighborhoodMap::singleton(3));
    EXPECT_EQ(r.iterations, 2);
    for (std::size_t x = 0; x < 3; ++x)
        for (std::size_t c = 0; c < f.size(); ++c) EXPECT_NEAR(r.q(x, c), m.expected_reward(x, f.action(c, x)), 1e-15);
}

TEST(FixedPoint, DeltasShrinkGeometrically) {
    const auto m = random_mdp(5, 2, 0.9, 21);
    const auto f = PolicyFamily::all_deterministic(5, 2);
    const auto r = fixed_point(m, f, NeighborhoodMap::singleton(5, NeighborhoodKind::average));
    ASSERT_GT(r.deltas.size(), 2u);
    for (std::size_t t = 0; t < r.deltas.size(); ++t)
        EXPECT_LE(r.deltas[t], std::pow(0.9, static_cast<double>(t)) * r.deltas[0] * (1 + 1e-9) + 1e-15);
    EXPECT_LT(r.residual, 1e-9);
}

TEST(FixedPoint, ErrorsAndConvergenceFailure) {
    const auto m = random_mdp(3, 2, 0.99, 2);
    const auto f = PolicyFamily::all_deterministic(3, 2);
    const auto map = NeighborhoodMap::singleton(3);
    EXPECT_THROW(fixed_point(m, f, map, {0.0, 10}), ArgumentError);
    EXPECT_THROW(fixed_point(m, f, map, {1e-9, 0}), ArgumentError);
    try {
        fixed_point(m, f, map, {1e-12, 3});
        FAIL() << "expected ConvergenceError";
    } catch (const ConvergenceError& e) {
        EXPECT_GT(e.residual(), 0.0);
        EXPECT_EQ(e.iterations(), 3);
    }
}

TEST(FixedPoint, SingletonFullFamilyEqualsValueIteration) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto m = random_mdp(4, 3, 0.9, seed);
        const auto f = PolicyFamily::all_deterministic(4, 3);
        const auto r = fixed_point(m, f, NeighborhoodMap::singleton(4), {1e-11, 100000});
        const auto vi = value_iteration_classic(m, 1e-10);
        for (std::size_t x = 0; x < 4; ++x) EXPECT_NEAR(max_over_family(r.q, x), vi.values[x], 1e-6);
    }
}

TEST(FixedPoint, RestrictedProductFamilyIsBestPolicyInFamily) {
    // Allowed actions per state form a product family.
    const auto m = random_mdp(4, 3, 0.8, 99);
    const auto f = PolicyFamily::product(3, {{0, 2}, {1}, {0, 1, 2}, {2}});
    const auto r = fixed_point(m, f, NeighborhoodMap::singleton(4), {1e-12, 100000});
    for (std::size_t x = 0; x < 4; ++x) {
        double best = -1e300;
        for (std::size_t c = 0; c < f.size(); ++c) best = std::max(best, oracle::policy_value(m, f.table(c))[x]);
        EXPECT_NEAR(max_over_family(r.q, x), best, 1e-8);
    }
}

TEST(FixedPoint, NonProductFamilyUpperBoundsItsPolicies) {
    const auto m = random_mdp(4, 2, 0.8, 7);
    const PolicyFamily f(4, 2, {{0, 0, 1, 1}, {1, 1, 0, 0}, {0, 1, 0, 1}});
    const auto r = fixed_point(m, f, NeighborhoodMap::singleton(4), {1e-12, 100000});
    for (std::size_t x = 0; x < 4; ++x)
        for (std::size_t c = 0; c < f.size(); ++c)
            EXPECT_GE(max_over_family(r.q, x), oracle::policy_value(m, f.table(c))[x] - 1e-8);
}

TEST(ValueIteration, Examples) {
    const DiscreteMdp one(1, 1, {1.0}, {1.0}, 0.5);
    EXPECT_NEAR(value_iteration_classic(one).values[0], 2.0, 1e-9);

    const auto m0 = random_mdp(3, 3, 0.0, 4);
    const auto r0 = value_iteration_classic(m0);
    for (std::size_t x = 0; x < 3; ++x) {
        double best = -1e300;
        for (std::size_t a = 0; a < 3; ++a) best = std::max(best, m0.expected_reward(x, a));
        EXPECT_NEAR(r0.values[x], best, 1e-15);
    }
}

TEST(ValueIteration, MatchesPolicyEnumeration) {
    for (std::uint64_t seed = 100; seed < 105; ++seed) {
        const auto m = random_mdp(6, 3, 0.85, seed);
        const auto vi = value_iteration_classic(m, 1e-10);
        const auto brute = oracle::enumerate_optimal_values(m);
        for (std::size_t x = 0; x < 6; ++x) EXPECT_NEAR(vi.values[x], brute[x], 1e-8);
        const auto pv = oracle::policy_value(m, vi.policy);
        for (std::size_t x = 0; x < 6; ++x) EXPECT_NEAR(pv[x], brute[x], 1e-8);
    }
}

TEST(ValueIteration, TiesGoToLowestAction) {
    const DiscreteMdp m(1, 3, {1, 1, 1}, {1, 1, 1}, 0.5);
    EXPECT_EQ(value_iteration_classic(m).policy[0], 0u);
}

TEST(QLearning, StepSemantics) {
    const auto map = NeighborhoodMap::singleton(2);
    FamilyQFunction q(2, 2, 1.0);
    const FamilyTransition t{0, 1, 5.0, 1};
    auto q0 = q;
    q_learning_step(q0, t, 0.0, 0.5, map);
    EXPECT_EQ(q0.values(), q.values());
    auto q1 = q;
    q_learning_step(q1, t, 1.0, 0.0, map);
    EXPECT_EQ(q1(0, 1), 5.0);
    EXPECT_EQ(q1(0, 0), 1.0);
    EXPECT_EQ(q1(1, 1), 1.0);
    EXPECT_THROW(q_learning_step(q, t, 1.5, 0.5, map), ArgumentError);
    EXPECT_THROW(q_learning_step(q, t, -0.1, 0.5, map), ArgumentError);
}

TEST(QLearning, ConvergesOnSmallInstance) {
    const auto m = random_mdp(3, 2, 0.5, 31);
    const auto f = PolicyFamily::all_deterministic(3, 2);
    const auto map = NeighborhoodMap::singleton(3, NeighborhoodKind::max);
    const auto star = fixed_point(m, f, map, {1e-12, 100000}).q;
    FamilyQFunction q(3, f.size());
    std::vector<long> visits(3 * f.size(), 0);
    Rng rng(4);
    for (int sweep = 0; sweep < 200000; ++sweep)
        for (std::size_t x = 0; x < 3; ++x)
            for (std::size_t c = 0; c < f.size(); ++c) {
                const auto a = f.action(c, x);
                std::discrete_distribution<std::size_t> next(m.p_row(x, a).begin(), m.p_row(x, a).end());
                const auto y = next(rng);
                const double alpha = 1.0 / (1.0 + static_cast<double>(visits[x * f.size() + c]++));
                q_learning_step(q, {x, c, m.r(x, a, y), y}, alpha, m.gamma(), map);
            }
    EXPECT_LT(sup_distance(q, star), 5e-2);
}

TEST(Aggregate, SingletonPartitionReproducesOriginal) {
    const auto m = random_mdp(3, 2, 0.7, 12);
    const auto f = PolicyFamily::constant(3, 2);
    const auto agg = build_aggregate_average(m, f, Partition::singletons(3));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t j = 0; j < 3; ++j) {
                EXPECT_NEAR(agg.mdp.p(i, c, j), m.p(i, c, j), 1e-15);
                if (m.p(i, c, j) > 0) {
                    EXPECT_NEAR(agg.mdp.r(i, c, j), m.r(i, c, j), 1e-12);
                }
            }
}

TEST(Aggregate, WholeSpaceIsSelfLoop) {
    const auto m = random_mdp(4, 2, 0.7, 13);
    Rng rng(2);
    const auto part = Partition::whole(4);
    const auto agg = build_aggregate_average(m, PolicyFamily::all_deterministic(4, 2), part, random_zeta(part, rng));
    ASSERT_EQ(agg.mdp.n_states(), 1u);
    for (std::size_t c = 0; c < agg.mdp.n_actions(); ++c) EXPECT_NEAR(agg.mdp.p(0, c, 0), 1.0, 1e-12);
}

TEST(Aggregate, MaxWholeSpaceDeterministicClosedForm) {
    // Deterministic 3-state MDP; with one region, V = r_max / (1 - gamma).
    const DiscreteMdp m(3, 2, {0, 1, 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 0, 0, 1, 0},
                        {0.3, 0.3, 0.3, -1, -1, -1, 0.9, 0.9, 0.9, 0.2, 0.2, 0.2, 0.5, 0.5, 0.5, 0.1, 0.1, 0.1}, 0.6);
    const auto agg = build_aggregate_max(m, PolicyFamily::all_deterministic(3, 2), Partition::whole(3));
    const auto v = value_iteration_classic(agg.mdp, 1e-12).values;
    EXPECT_NEAR(v[0], 0.9 / (1 - 0.6), 1e-9);
}

TEST(Aggregate, AverageMatchesPartitionedFixedPoint) {
    const auto m = random_mdp(4, 2, 0.9, 14);
    const auto f = PolicyFamily::all_deterministic(4, 2);
    const Partition part({0, 1, 0, 1});
    const auto agg = build_aggregate_average(m, f, part);
    const auto vagg = agg.expand(value_iteration_classic(agg.mdp, 1e-11).values);
    const auto map = NeighborhoodMap::from_partition(part, NeighborhoodKind::average);
    const auto q = fixed_point(m, f, map, {1e-12, 100000}).q;
    const auto v = neighborhood_values(q, map);
    for (std::size_t x = 0; x < 4; ++x) EXPECT_NEAR(vagg[x], v[x], 1e-6);
}

TEST(Aggregate, MaxMatchesPartitionedFixedPoint) {
    const auto m = random_mdp(4, 2, 0.9, 15);
    const auto f = PolicyFamily::all_deterministic(4, 2);
    const Partition part({1, 0, 0, 1});
    const auto agg = build_aggregate_max(m, f, part);
    const auto vagg = agg.expand(value_iteration_classic(agg.mdp, 1e-11).values);
    const auto map = NeighborhoodMap::from_partition(part, NeighborhoodKind::max);
    const auto q = fixed_point(m, f, map, {1e-12, 100000}).q;
    const auto v = neighborhood_values(q, map);
    for (std::size_t x = 0; x < 4; ++x) EXPECT_NEAR(vagg[x], v[x], 1e-6);
}

TEST(Aggregate, UnreachableTransitionHasZeroReward) {
    // State 0 stays put, so region {0} never reaches region {1}.
    const DiscreteMdp m(2, 1, {1, 0, 0.5, 0.5}, {2, 7, 3, 3}, 0.5);
    const auto agg = build_aggregate_average(m, PolicyFamily::constant(2, 1), Partition::singletons(2));
    EXPECT_EQ(agg.mdp.p(0, 0, 1), 0.0);
    EXPECT_EQ(agg.mdp.r(0, 0, 1), 0.0);
}

TEST(TheoryChecks, FullSuitePasses) {
    const auto results = run_theory_checks();
    ASSERT_EQ(results.size(), 11u);
    for (const auto& r : results) EXPECT_TRUE(r.passed()) << r.id << " worst " << r.worst;
}

TEST(TheoryChecks, ContractionAcrossKindsOnFreshSeed) {
    TheoryCheckOptions opt;
    opt.seed = 777;
    opt.contraction_instances = 200;
    for (auto k : {NeighborhoodKind::max, NeighborhoodKind::min, NeighborhoodKind::average}) {
        EXPECT_TRUE(check_contraction(k, opt).passed());
        EXPECT_TRUE(check_operator_bound(k, opt).passed());
    }
}
