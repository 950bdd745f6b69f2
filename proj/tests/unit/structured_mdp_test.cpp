#include <gtest/gtest.h>

#include <cmath>

#include "../support/generators.hpp"
#include "restless/solver.hpp"
#include "restless/structured_mdp.hpp"

using namespace restless;
using namespace restless::testing;

namespace {

std::vector<ArmLayout> layouts(std::vector<std::size_t> states, int cap, int period = 1) {
  std::vector<ArmLayout> out;
  for (auto s : states) out.push_back(ArmLayout{s, cap, 0, period});
  return out;
}

}  // namespace

TEST(GapScheme, SaturatesAtTheFloor) {
  const GapScheme g(5, 1);
  EXPECT_EQ(g.floor(), 5);
  EXPECT_EQ(g.saturate(3), 3);
  EXPECT_EQ(g.saturate(5), 5);
  EXPECT_EQ(g.saturate(500), 5);
  EXPECT_EQ(g.next(5), 5);
  EXPECT_EQ(g.value_count(), 5);
  EXPECT_EQ(g.law_exponent(4), 4);
  EXPECT_EQ(g.law_exponent(5), 5);
}

TEST(GapScheme, CapOneStillSeparatesFreshArms) {
  const GapScheme g(1, 1);
  EXPECT_EQ(g.floor(), 2);
  EXPECT_EQ(g.saturate(1), 1);
  EXPECT_EQ(g.saturate(7), 2);
}

TEST(GapScheme, PeriodicRingKeepsResidues) {
  const GapScheme g(4, 3);
  EXPECT_EQ(g.value_count(), 6);
  // Saturated values 4, 5, 6 stand for n = 4, 5, 6 mod 3.
  EXPECT_EQ(g.saturate(7), 4);
  EXPECT_EQ(g.saturate(8), 5);
  EXPECT_EQ(g.saturate(9), 6);
  EXPECT_EQ(g.next(6), 4);
  EXPECT_EQ(g.law_exponent(g.saturate(100)), g.law_exponent(g.saturate(4)));
  EXPECT_EQ(g.law_exponent(6), 6);
}

TEST(MetaStateSpace, SizesOfSmallSpaces) {
  // Two 2-state arms with cap c: fresh arm, both states, other gap in 2..c.
  for (int cap : {2, 3, 10}) EXPECT_EQ(MetaStateSpace(layouts({2, 2}, cap)).size(), 8u * (cap - 1));
  EXPECT_EQ(enumerate_states(layouts({1, 1}, 2)).size(), 2u);
  // Unsaturated counters are distinct, saturated ones may coincide.
  EXPECT_EQ(MetaStateSpace(layouts({1, 1, 1}, 3)).size(), 9u);
}

TEST(MetaStateSpace, SizeLimitIsEnforced) {
  EXPECT_THROW(MetaStateSpace(layouts({3, 3, 3}, 200), 1000), ValidationError);
}

TEST(MetaStateSpace, StatesAreValidAndSorted) {
  const MetaStateSpace space(layouts({2, 1, 2}, 4));
  for (std::size_t x = 0; x < space.size(); ++x) {
    EXPECT_TRUE(space.valid(space.state(x)));
    EXPECT_EQ(space.find(space.state(x)), x);
    if (x) EXPECT_LT(space.state(x - 1), space.state(x));
    int fresh = 0;
    for (auto g : space.state(x).gap) fresh += g == 1;
    EXPECT_EQ(fresh, 1);
  }
  MetaState bad{{0, 0, 0}, {1, 1, 2}};
  EXPECT_FALSE(space.valid(bad));
  EXPECT_FALSE(space.find(bad).has_value());
}

TEST(MetaStateSpace, SuccessorsFollowTheCounters) {
  const MetaStateSpace space(layouts({2, 3}, 5));
  for (std::size_t x = 0; x < space.size(); ++x)
    for (std::size_t a = 0; a < 2; ++a) {
      const auto succ = space.successors(x, a);
      ASSERT_EQ(succ.size(), a == 0 ? 2u : 3u);
      for (std::size_t l = 0; l < succ.size(); ++l) {
        const auto& y = space.state(succ[l]);
        EXPECT_EQ(y.gap[a], 1u);
        EXPECT_EQ(y.state[a], l);
        const auto b = 1 - a;
        EXPECT_EQ(y.state[b], space.state(x).state[b]);
        EXPECT_EQ(static_cast<int>(y.gap[b]), space.scheme(b).next(static_cast<int>(space.state(x).gap[b])));
      }
    }
}

TEST(MetaStateSpace, EncodeSaturatesObservedGaps) {
  const MetaStateSpace space(layouts({2, 2}, 4));
  ObservationSummary s{{1, 0}, {1, 9}};
  const auto& m = space.state(space.encode(s));
  EXPECT_EQ(m.state, (std::vector<std::uint32_t>{1, 0}));
  EXPECT_EQ(m.gap, (std::vector<std::uint32_t>{1, 4}));
}

TEST(MetaStateSpace, ColoursAgreeOnArmStateAndGapClass) {
  const MetaStateSpace space(layouts({2, 2}, 4));
  for (std::size_t x = 0; x < space.size(); ++x)
    for (std::size_t a = 0; a < 2; ++a) {
      const auto key = space.color_of(x, a);
      EXPECT_EQ(key.arm, a);
      EXPECT_EQ(key.state, space.state(x).state[a]);
      EXPECT_EQ(key.gap_class, std::min<std::uint32_t>(space.state(x).gap[a], 4));
      EXPECT_EQ(space.color_id(key), space.color(x, a));
    }
  // (arm, state, gap class 1..4); class 1 is a repeated pull.
  EXPECT_EQ(space.color_count(), 2u * 2u * 4u);
}

TEST(Translation, MapsDifferencesAndFixesTheRest) {
  const Translation t({{3, 7}, {5, 9}});
  EXPECT_EQ(t(3), 7u);
  EXPECT_EQ(t(5), 9u);
  EXPECT_EQ(t(7), 3u);
  EXPECT_EQ(t(9), 5u);
  EXPECT_EQ(t(4), 4u);
  EXPECT_THROW(Translation({{1, 2}, {3, 2}}), std::invalid_argument);
}

TEST(StructuredMdp, AggregatedModelIsEpsStructured) {
  const double eps = 1e-2;
  const auto model = build_aggregated_mdp(example1(0.05).arms, eps);
  model.mdp().validate();
  const auto check = model.check_structure();
  EXPECT_LE(check.max_reward_gap, eps + 1e-12);
  EXPECT_LE(check.max_translated_l1, eps + 1e-12);
  EXPECT_GT(check.pairs_checked, 0u);
}

TEST(StructuredMdp, TStepModelIsTwoEpsStructured) {
  const double eps = 0.05;
  const auto model = build_t_step_mdp(example3(0.1).arms, 60, eps);
  const auto check = model.check_structure();
  EXPECT_LE(check.max_translated_l1, 2 * eps + 1e-12);
}

TEST(StructuredMdp, TranslateRejectsColourMismatch) {
  const auto model = build_aggregated_mdp(example1(0.2).arms, 0.1);
  std::size_t x2 = 1;
  while (model.skeleton().color_of(x2, 0) == model.skeleton().color_of(0, 0)) ++x2;
  EXPECT_THROW(model.translate(0, 0, x2, 0), std::invalid_argument);
  EXPECT_NO_THROW(model.translate(0, 0, 0, 0));
}

TEST(StructuredMdp, RewardsAreLandingExpectations) {
  const auto inst = example3(0.2);
  const auto model = build_aggregated_mdp(inst.arms, 0.01);
  for (std::size_t x = 0; x < model.size(); ++x) {
    const auto law = model.landing_law(x, 0);
    EXPECT_NEAR(model.mdp().reward(x, 0), law[1], 1e-12);
    EXPECT_NEAR(model.mdp().reward(x, 1), 0.5, 1e-12);
  }
}

TEST(StructuredMdp, PeriodicArmsUseResidues) {
  const auto a = cycle_arm(3, {0.9, 0.1, 0.5}), b = cycle_arm(3, {0.2, 0.8, 0.6});
  const auto l = mixing_layouts({a, b}, 0.01);
  EXPECT_EQ(l[0].period, 3);
  const auto model = build_aggregated_mdp({a, b}, 0.01);
  // Deterministic chains stay deterministic after aggregation.
  for (std::size_t x = 0; x < model.size(); ++x)
    for (std::size_t act = 0; act < 2; ++act) EXPECT_EQ(model.mdp().transitions(x, act).size(), 1u);
}

TEST(Aggregate, MergesTheTStepModelIntoTheAggregatedOne) {
  const auto inst = example1(0.1);
  const double eps = 1e-3;
  const auto t_step = build_t_step_mdp(inst.arms, 80, eps);
  const auto merged = aggregate(t_step);
  const auto direct = build_aggregated_mdp(inst.arms, eps);
  EXPECT_EQ(merged.size(), direct.size());
  IterationOptions o;
  o.tolerance = 1e-11;
  o.max_iterations = 1'000'000;
  const double g_full = relative_value_iteration(t_step.mdp(), o).gain;
  const double g_merged = relative_value_iteration(merged.mdp(), o).gain;
  EXPECT_NEAR(g_merged, relative_value_iteration(direct.mdp(), o).gain, 1e-9);
  EXPECT_NEAR(g_full, g_merged, eps);
}

TEST(Aggregate, AveragingRuleStaysClose) {
  const auto t_step = build_t_step_mdp(example3(0.1).arms, 60, 1e-2);
  const auto low = aggregate(t_step, AggregationRule::lowest_gap);
  const auto avg = aggregate(t_step, AggregationRule::average);
  EXPECT_EQ(low.size(), avg.size());
  const double a = relative_value_iteration(low.mdp()).gain, b = relative_value_iteration(avg.mdp()).gain;
  EXPECT_NEAR(a, b, 2e-2);
}
