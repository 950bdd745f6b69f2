#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "../support/generators.hpp"
#include "restless/baselines.hpp"
#include "restless/grid.hpp"
#include "restless/regret.hpp"
#include "restless/scenario.hpp"
#include "restless/witness.hpp"

using namespace restless;
using namespace restless::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = fs::path(RESTLESS_SOURCE_DIR) / "scenarios";

const char* kTwoArms = R"(name = tiny
horizon = 500
replications = 3
seed = 11
algorithm = colored_ucrl2

[arm]
name = a
row = 0.9 0.1
row = 0.2 0.8
rewards = 0 1

[arm]
name = b
row = 1
rewards = 1/2
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("restless_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Numbers, ParseAndFormat) {
  EXPECT_EQ(parse_number("0.05"), 0.05);
  EXPECT_EQ(parse_number("1/3"), 1.0 / 3.0);
  EXPECT_THROW(parse_number("0.5x"), std::invalid_argument);
  EXPECT_THROW(parse_number("1/0"), std::invalid_argument);
  for (double v : {0.1, 1.0 / 3.0, 0.7249965821, 1e-300, 123456789.0}) EXPECT_EQ(parse_number(format_number(v)), v);
}

TEST(Scenario, BundledExamples) {
  const auto e1 = load_scenario(kScenarios / "example1.cfg");
  ASSERT_EQ(e1.instance.arm_count(), 2u);
  for (const auto& arm : e1.instance.arms) {
    EXPECT_EQ(arm.state_count(), 2u);
    EXPECT_EQ(arm.rewards, (std::vector<double>{0.0, 1.0}));
    EXPECT_EQ(arm.transitions(0, 1), 0.05);
  }
  const auto lb = load_scenario(kScenarios / "lowerbound.cfg");
  for (const auto& arm : lb.instance.arms) {
    EXPECT_EQ(arm.state_count(), 3u);
    EXPECT_EQ(period(arm.transitions), 3);
    EXPECT_EQ(arm.assumed_period, 3);
  }
  EXPECT_EQ(load_scenario(kScenarios / "example3.cfg").instance.arms[1].state_count(), 1u);
  EXPECT_EQ(load_scenario(kScenarios / "example2.cfg").instance.arms[0].transitions(0, 1), 0.95);
}

TEST(Scenario, ErrorsNameTheLineAndRow) {
  std::string text = kTwoArms;
  text.replace(text.find("row = 0.2 0.8"), 13, "row = 0.2 0.7");
  try {
    parse_scenario(text, "bad.cfg");
    FAIL() << "accepted a row summing to 0.9";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 10);
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("bad.cfg:10"), std::string::npos);
  }
  EXPECT_THROW(parse_scenario(std::string(kTwoArms) + "colour = red\n", "x"), ConfigError);
  EXPECT_THROW(parse_scenario("horizon = 10\n", "x"), ConfigError);
  std::string reducible = kTwoArms;
  reducible.replace(reducible.find("row = 0.9 0.1"), 13, "row = 1 0");
  EXPECT_THROW(parse_scenario(reducible, "x"), ConfigError);
  std::string reward = kTwoArms;
  reward.replace(reward.find("rewards = 0 1"), 13, "rewards = 0 2");
  EXPECT_THROW(parse_scenario(reward, "x"), ConfigError);
}

TEST(Scenario, RoundTripIsExact) {
  const auto sc = parse_scenario(kTwoArms, "x");
  const auto text = format_scenario(sc);
  const auto again = parse_scenario(text, "y");
  EXPECT_EQ(format_scenario(again), text);
  EXPECT_EQ(again.instance.arms[1].rewards[0], 0.5);
  EXPECT_EQ(again.instance.arms[0].transitions(1, 0), 0.2);
  EXPECT_EQ(again.seed, 11u);
}

TEST(Regret, CheckpointsAndValues) {
  EXPECT_EQ(checkpoint_times(10), (std::vector<std::int64_t>{1, 2, 4, 8, 10}));
  EXPECT_EQ(checkpoint_times(8), (std::vector<std::int64_t>{1, 2, 4, 8}));
  const auto trace = compute_regret({1, 0, 1, 1, 0}, 0.75);
  ASSERT_EQ(trace.checkpoints.size(), 4u);
  EXPECT_DOUBLE_EQ(trace.checkpoints[2].regret, 4 * 0.75 - 3);
  EXPECT_DOUBLE_EQ(trace.final_regret(), 5 * 0.75 - 3);
  std::ostringstream os;
  write_csv(os, trace);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,cum_reward,regret");
}

TEST(Grid, FilesAndDeterminism) {
  auto sc = parse_scenario(kTwoArms, "x");
  auto other = sc;
  other.name = "tiny_rr";
  other.algorithm = Algorithm::round_robin;
  const auto d1 = fresh_dir("grid1"), d2 = fresh_dir("grid2");
  const auto s1 = run_grid({sc, other}, d1, 2);
  run_grid({sc, other}, d2, 1);
  std::size_t csv = 0, json = 0;
  for (const auto& e : fs::recursive_directory_iterator(d1)) {
    if (e.path().extension() == ".csv") {
      ++csv;
      EXPECT_EQ(slurp(e.path()), slurp(d2 / fs::relative(e.path(), d1))) << e.path();
    }
    json += e.path().extension() == ".json";
  }
  EXPECT_EQ(csv, 6u);
  EXPECT_EQ(json, 2u);
  for (const auto& s : s1) EXPECT_TRUE(s.errors.empty());

  // The regret column is t * rho* - cum_reward, recomputed exactly.
  const auto summary = nlohmann::json::parse(slurp(d1 / "tiny" / "summary.json"));
  const double rho = summary["rho_star"].get<double>();
  std::istringstream rows(slurp(d1 / "tiny" / "rep_0.csv"));
  std::string line;
  std::getline(rows, line);
  double last_cum = 0.0;
  while (std::getline(rows, line)) {
    std::istringstream f(line);
    std::string t, cum, reg;
    std::getline(f, t, ',');
    std::getline(f, cum, ',');
    std::getline(f, reg, ',');
    EXPECT_EQ(parse_number(reg), parse_number(t) * rho - parse_number(cum));
    EXPECT_GE(parse_number(cum), last_cum);
    last_cum = parse_number(cum);
  }
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Grid, FailedCellsAreReported) {
  auto sc = parse_scenario(kTwoArms, "x");
  sc.name = "broken";
  sc.algorithm = Algorithm::state_discovery;
  sc.instance.arms[0] = cycle_arm(2, {0, 1}, "a");  // periodic without a configured period
  sc.instance.arms[0].assumed_period = 1;
  const auto dir = fresh_dir("broken");
  const auto s = run_grid({sc}, dir, 1);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].errors.size(), 3u);
  fs::remove_all(dir);
}

namespace {

double regret_rate(Algorithm algorithm, const BanditInstance& inst, std::int64_t horizon, int reps = 3) {
  Scenario sc;
  sc.name = "rate";
  sc.instance = inst;
  sc.horizon = horizon;
  sc.algorithm = algorithm;
  sc.replications = reps;
  sc.seed = 3;
  const Oracle oracle(inst, sc.eps_oracle);
  double total = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    const auto cell = run_cell(sc, oracle, rep);
    EXPECT_TRUE(cell.ok) << cell.error;
    total += cell.trace.final_regret();
  }
  return total / reps / static_cast<double>(horizon);
}

}  // namespace

TEST(Baselines, Example1Rates) {
  const auto inst = example1(0.05);
  const double rho = Oracle(inst, 1e-3).solve().rho;
  EXPECT_EQ(best_fixed_arm_gain(inst), 0.5);
  const double fixed = regret_rate(Algorithm::best_fixed_arm, inst, 100000);
  EXPECT_GT(fixed, 0.15);
  EXPECT_NEAR(fixed, rho - 0.5, 0.02);
  EXPECT_NEAR(regret_rate(Algorithm::round_robin, inst, 100000), rho - 0.5, 0.02);
  EXPECT_NEAR(regret_rate(Algorithm::oracle_optimal, inst, 100000), 0.0, 0.01);
}

TEST(Baselines, RoundRobinAndMyopicGains) {
  const Oracle o1(example1(0.05), 1e-3);
  const auto start = sweep_start_states(o1.space()).front();
  EXPECT_NEAR(policy_average_reward(o1.mdp().mdp(), round_robin_policy(o1.space()), start), 0.5, 1e-9);
  const Oracle o3(example3(0.05), 1e-3);
  const auto s3 = sweep_start_states(o3.space()).front();
  const double myopic = policy_average_reward(o3.mdp().mdp(), myopic_policy(o3.mdp()), s3);
  EXPECT_LT(myopic, o3.solve().rho - 1e-3);
}

TEST(Baselines, FreshArmAndFixedPolicies) {
  const MetaStateSpace space({ArmLayout{2, 3, 0, 1}, ArmLayout{1, 3, 0, 1}, ArmLayout{2, 3, 0, 1}});
  for (std::size_t x = 0; x < space.size(); ++x) {
    EXPECT_EQ(fixed_arm_policy(space, 2)[x], 2u);
    EXPECT_EQ(round_robin_policy(space)[x], (fresh_arm(space.state(x)) + 1) % 3);
  }
}

TEST(Witness, ExplorationOnExample3) {
  const Oracle oracle(example3(0.05), 1e-3);
  const auto found = exploring_states(oracle);
  ASSERT_FALSE(found.empty());
  for (const auto& e : found) EXPECT_LT(e.chosen_reward, e.best_reward);
}

TEST(Witness, SearchFindsAVerifiedWitness) {
  const auto w = index_suboptimality_search(20000);
  ASSERT_TRUE(w.found) << describe_witness(w);
  EXPECT_NE(w.action_full, w.action_base);
  EXPECT_EQ(w.x_full.state[0], w.x_base.state[0]);
  EXPECT_EQ(w.x_full.gap[2], w.x_base.gap[1]);
  EXPECT_GT(w.rho_full, w.forced_full);
  EXPECT_GT(w.rho_base, w.forced_base);
  EXPECT_GT(w.margin_full, 0.0);
  const auto none = index_suboptimality_search(5);
  EXPECT_FALSE(none.found);
  EXPECT_NE(describe_witness(none).find("inconclusive"), std::string::npos);
}
