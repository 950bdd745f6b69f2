#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "../support/generators.hpp"
#include "restless/oracle.hpp"
#include "restless/solver.hpp"

using namespace restless;
using namespace restless::testing;

namespace {

Mdp single_state(double r) {
  Mdp m(1, 1);
  m.set(0, 0, r, {{0, 1.0}});
  return m;
}

// Two states; action 0 stays, action 1 moves. Rewards 0.2 and 0.9.
Mdp stay_or_move() {
  Mdp m(2, 2);
  m.set(0, 0, 0.2, {{0, 1.0}});
  m.set(0, 1, 0.2, {{1, 1.0}});
  m.set(1, 0, 0.9, {{1, 1.0}});
  m.set(1, 1, 0.9, {{0, 1.0}});
  return m;
}

Mdp random_mdp(Rng& rng, std::size_t n, std::size_t k) {
  Mdp m(n, k);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t a = 0; a < k; ++a) {
      std::vector<double> w(n);
      for (auto& v : w) v = rng.bernoulli(0.5) ? uniform(rng, 0.0, 1.0) : 0.0;
      w[(s + a + 1) % n] += 0.1;
      const double sum = std::accumulate(w.begin(), w.end(), 0.0);
      std::vector<Transition> row;
      for (std::size_t t = 0; t < n; ++t)
        if (w[t] > 0) row.push_back({static_cast<std::uint32_t>(t), w[t] / sum});
      m.set(s, a, uniform(rng, 0.0, 1.0), row);
    }
  return m;
}

}  // namespace

TEST(Rvi, SingleState) {
  const auto r = relative_value_iteration(single_state(0.5));
  EXPECT_NEAR(r.gain, 0.5, 1e-12);
  EXPECT_EQ(r.bias.size(), 1u);
}

TEST(Rvi, PrefersTheBetterAbsorbingState) {
  const auto r = relative_value_iteration(stay_or_move());
  EXPECT_NEAR(r.gain, 0.9, 1e-9);
  EXPECT_EQ(r.policy[0], 1u);
  EXPECT_EQ(r.policy[1], 0u);
}

TEST(Rvi, DampingHandlesPeriodicModels) {
  Mdp m(2, 1);
  m.set(0, 0, 1.0, {{1, 1.0}});
  m.set(1, 0, 0.0, {{0, 1.0}});
  IterationOptions o;
  o.damping_window = 10;
  const auto r = relative_value_iteration(m, o);
  EXPECT_NEAR(r.gain, 0.5, 1e-8);
  EXPECT_TRUE(r.damped);
}

TEST(Rvi, ErrorsAtTheIterationCap) {
  IterationOptions o;
  o.max_iterations = 3;
  o.tolerance = 1e-15;
  Rng rng(1);
  EXPECT_THROW(relative_value_iteration(random_mdp(rng, 6, 2), o), NumericalError);
}

TEST(Rvi, AgreesWithBruteForceOnRandomModels) {
  Rng rng(17);
  IterationOptions o;
  o.tolerance = 1e-11;
  for (int i = 0; i < 25; ++i) {
    const auto m = random_mdp(rng, uniform_index(rng, 2, 6), uniform_index(rng, 1, 3));
    const auto rvi = relative_value_iteration(m, o);
    const auto bf = brute_force_policy_search(m);
    EXPECT_NEAR(rvi.gain, bf.gain, 1e-6);
    EXPECT_NEAR(policy_average_reward(m, rvi.policy, 0), rvi.gain, 1e-6);
  }
}

TEST(BruteForce, BudgetIsEnforced) {
  Rng rng(2);
  EXPECT_THROW(brute_force_policy_search(random_mdp(rng, 12, 3), 1000), std::length_error);
}

TEST(BruteForce, PinnedActionsAreRespected) {
  const auto r = brute_force_policy_search(stay_or_move(), 100, {0, -1});
  EXPECT_NEAR(r.gain, 0.9, 1e-12);  // state 1 is still optimal on its own
  EXPECT_EQ(r.policy[0], 0u);
}

TEST(PolicyGains, MultichainPolicies) {
  // Staying everywhere: each state is its own closed class.
  const auto g = policy_gains(stay_or_move(), {0, 0});
  EXPECT_NEAR(g[0], 0.2, 1e-12);
  EXPECT_NEAR(g[1], 0.9, 1e-12);
  // Moving everywhere: one periodic class with average 0.55.
  const auto h = policy_gains(stay_or_move(), {1, 1});
  EXPECT_NEAR(h[0], 0.55, 1e-12);
  // Transient state absorbed with probability 1/2 each way.
  Mdp m(3, 1);
  m.set(0, 0, 0.0, {{1, 0.5}, {2, 0.5}});
  m.set(1, 0, 1.0, {{1, 1.0}});
  m.set(2, 0, 0.0, {{2, 1.0}});
  EXPECT_NEAR(policy_gains(m, {0, 0, 0})[0], 0.5, 1e-12);
}

TEST(OptimisticTransition, SpecExample) {
  const std::vector<double> center{0.5, 0.5}, values{1.0, 0.0};
  const auto p = optimistic_transition(center, 0.2, values);
  EXPECT_NEAR(p[0], 0.6, 1e-15);
  EXPECT_NEAR(p[1], 0.4, 1e-15);
}

TEST(OptimisticTransition, ShiftsFromTheWorstStates) {
  const std::vector<double> center{0.5, 0.5, 0.0}, values{1.0, 0.0, 2.0};
  const auto p = optimistic_transition(center, 0.4, values);
  EXPECT_NEAR(p[2], 0.2, 1e-15);
  EXPECT_NEAR(p[1], 0.3, 1e-15);
  EXPECT_NEAR(p[0], 0.5, 1e-15);
}

TEST(OptimisticTransition, StaysInTheBallAndBeatsTheGrid) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = uniform_index(rng, 2, 3);
    std::vector<double> c(n), v(n);
    for (auto& x : c) x = uniform(rng, 0.0, 1.0);
    const double s = std::accumulate(c.begin(), c.end(), 0.0);
    for (auto& x : c) x /= s;
    for (auto& x : v) x = uniform(rng, -1.0, 1.0);
    const double radius = uniform(rng, 0.0, 2.5);
    const auto p = optimistic_transition(c, radius, v);
    double l1 = 0.0, total = 0.0, value = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_GE(p[j], -1e-15);
      l1 += std::abs(p[j] - c[j]);
      total += p[j];
      value += p[j] * v[j];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_LE(l1, radius + 1e-12);
    // No member of a coarse grid over the ball does better.
    const int steps = 40;
    for (int a = 0; a <= steps; ++a)
      for (int b = 0; a + b <= steps; ++b) {
        std::vector<double> q{double(a) / steps, double(b) / steps};
        if (n == 3) q.push_back(1.0 - q[0] - q[1]);
        else if (a + b != steps) continue;
        double d = 0.0, qv = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          d += std::abs(q[j] - c[j]);
          qv += q[j] * v[j];
        }
        if (d <= radius) EXPECT_LE(qv, value + 1e-12);
      }
  }
}

TEST(Evi, ZeroRadiiReproduceRvi) {
  const auto model = build_aggregated_mdp(example3(0.1).arms, 1e-3);
  IterationOptions o;
  o.tolerance = 1e-11;
  const auto rvi = relative_value_iteration(model.mdp(), o);
  const auto evi = extended_value_iteration(model.skeleton(), plausible_set_from(model), o);
  EXPECT_NEAR(rvi.gain, evi.gain, 1e-9);
}

TEST(Evi, RewardRadiusTwoClipsEverythingToOne) {
  const auto model = build_aggregated_mdp(example1(0.1).arms, 0.05);
  auto ps = plausible_set_from(model);
  std::fill(ps.reward_radius.begin(), ps.reward_radius.end(), 2.0);
  EXPECT_NEAR(extended_value_iteration(model.skeleton(), ps).gain, 1.0, 1e-9);
}

TEST(Evi, OptimismAndMonotonicity) {
  const auto model = build_aggregated_mdp(example3(0.1).arms, 0.01);
  IterationOptions o;
  o.tolerance = 1e-10;
  const double truth = relative_value_iteration(model.mdp(), o).gain;
  double previous = -1.0;
  for (double radius : {0.0, 0.05, 0.1, 0.3, 0.6}) {
    auto ps = plausible_set_from(model);
    std::fill(ps.reward_radius.begin(), ps.reward_radius.end(), radius);
    std::fill(ps.transition_radius.begin(), ps.transition_radius.end(), radius);
    for (auto support : {BallSupport::unrestricted, BallSupport::successors}) {
      const double g = extended_value_iteration(model.skeleton(), ps, o, support).gain;
      EXPECT_GE(g, truth - 1e-9);
      if (support == BallSupport::successors) {
        EXPECT_GE(g, previous - 1e-9);
        previous = g;
      }
    }
  }
}

TEST(Diameter, HittingTimesOfSimpleModels) {
  EXPECT_NEAR(mdp_diameter(stay_or_move()), 1.0, 1e-9);
  Mdp m(2, 1);
  m.set(0, 0, 0.0, {{0, 0.75}, {1, 0.25}});
  m.set(1, 0, 0.0, {{0, 0.5}, {1, 0.5}});
  EXPECT_NEAR(mdp_diameter(m), 4.0, 1e-6);
}

TEST(Reachability, PolicyAndAllActions) {
  EXPECT_EQ(reachable_states(stay_or_move(), 0).size(), 2u);
  EXPECT_EQ(reachable_states(stay_or_move(), 0, {0, 0}).size(), 1u);
  EXPECT_THROW(restrict_mdp(stay_or_move(), {0}), std::invalid_argument);
}

// Values computed once by the RVI oracle and cross-checked by exact
// evaluation of the returned policy.
TEST(Oracle, FrozenExampleGains) {
  EXPECT_NEAR(Oracle(example1(0.05), 1e-3).solve().rho, 0.724996582, 1e-8);
  EXPECT_NEAR(Oracle(example1(0.01), 1e-3).solve().rho, 0.744996919, 1e-8);
  EXPECT_NEAR(Oracle(example1(0.95), 1e-3).solve().rho, 0.725000000, 1e-8);
}

TEST(Oracle, NonCommunicatingModelsAreSolvedPerClass) {
  BanditInstance inst{{cycle_arm(3, {0.9, 0.1, 0.5}), cycle_arm(3, {0.2, 0.8, 0.6}, "other")}};
  const Oracle oracle(inst, 1e-3);
  EXPECT_FALSE(oracle.communicating());
  double best = 0.0;
  for (std::size_t x = 0; x < oracle.space().size(); ++x) best = std::max(best, oracle.solve_from(x).rho);
  // In phase: the best arm of every phase, (0.9 + 0.8 + 0.6) / 3.
  EXPECT_NEAR(best, 2.3 / 3, 1e-9);
}
