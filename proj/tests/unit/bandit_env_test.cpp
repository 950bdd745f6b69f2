#include <gtest/gtest.h>

#include "../support/generators.hpp"
#include "restless/bandit_env.hpp"

using namespace restless;
using namespace restless::testing;

TEST(Arms, StationaryMeans) {
  EXPECT_EQ(channel(0.05, "c").stationary_mean(), 0.5);
  EXPECT_DOUBLE_EQ(iid_arm(0.3).stationary_mean(), 0.3);
  EXPECT_NEAR(cycle_arm(3, {0.9, 0.1, 0.5}).stationary_mean(), 0.5, 1e-12);
  EXPECT_EQ(cycle_arm(3, {0, 0, 0}).assumed_period, 3);
}

TEST(Arms, ValidationCatchesBadFields) {
  auto arm = channel(0.1, "c");
  arm.rewards = {0.0, 1.5};
  EXPECT_THROW(arm.validate(), ValidationError);
  arm = channel(0.1, "c");
  arm.rewards = {0.0};
  EXPECT_THROW(arm.validate(), ValidationError);
  arm = channel(0.1, "c");
  arm.initial = {0.5, 0.4};
  EXPECT_THROW(arm.validate(), ValidationError);
  EXPECT_THROW(BanditInstance{}.validate(), ValidationError);
}

TEST(Bandit, SameSeedSameRun) {
  const auto inst = example3(0.1);
  RestlessBandit a(inst, 42), b(inst, 42), c(inst, 43);
  bool differs = false;
  for (int t = 0; t < 500; ++t) {
    const auto arm = static_cast<std::size_t>(t % 2);
    const auto oa = a.step(arm), ob = b.step(arm), oc = c.step(arm);
    EXPECT_EQ(oa.state, ob.state);
    EXPECT_EQ(oa.reward, ob.reward);
    differs = differs || oa.state != oc.state || oa.reward != oc.reward;
  }
  EXPECT_TRUE(differs);
}

TEST(Bandit, HiddenTrajectoriesIgnoreActions) {
  const auto inst = example1(0.2);
  RestlessBandit a(inst, 7), b(inst, 7);
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    a.step(0);
    b.step(rng.next() % 2);
    EXPECT_EQ(a.hidden_state(0), b.hidden_state(0));
    EXPECT_EQ(a.hidden_state(1), b.hidden_state(1));
  }
}

TEST(Bandit, ObservationRevealsCurrentStateThenAdvances) {
  const auto inst = example1(0.3);
  RestlessBandit env(inst, 3);
  for (int t = 0; t < 200; ++t) {
    const auto before = env.hidden_state(1);
    const auto obs = env.step(1);
    EXPECT_EQ(obs.state, before);
    EXPECT_EQ(obs.reward, static_cast<double>(before));  // deterministic rewards
    EXPECT_EQ(obs.t, t + 1);
  }
  EXPECT_EQ(env.time(), 201);
}

TEST(Bandit, SummaryGapsCountStepsSinceLastPull) {
  RestlessBandit env(example1(0.1), 1);
  EXPECT_THROW(env.last_observation_summary(), std::logic_error);
  env.step(0);
  EXPECT_FALSE(env.all_arms_observed());
  env.step(1);
  env.step(1);
  const auto s = env.last_observation_summary();
  EXPECT_EQ(s.gap[0], 3);
  EXPECT_EQ(s.gap[1], 1);
  EXPECT_THROW(env.step(2), std::out_of_range);
}

TEST(Bandit, BernoulliRewardsHaveTheRightMean) {
  RestlessBandit env(BanditInstance{{iid_arm(0.3)}}, 9);
  double sum = 0.0;
  const int n = 100000;
  for (int t = 0; t < n; ++t) {
    const double r = env.step(0).reward;
    EXPECT_TRUE(r == 0.0 || r == 1.0);
    sum += r;
  }
  EXPECT_NEAR(sum / n, 0.3, 0.01);
}

TEST(Bandit, PointInitialState) {
  auto arm = cycle_arm(3, {0.9, 0.1, 0.5});
  arm.initial = {0.0, 1.0, 0.0};
  RestlessBandit env(BanditInstance{{arm}}, 5);
  EXPECT_EQ(env.step(0).state, 1u);
  EXPECT_EQ(env.step(0).state, 2u);
  EXPECT_EQ(env.step(0).state, 0u);
}
