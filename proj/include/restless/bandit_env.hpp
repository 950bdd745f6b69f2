#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "restless/chain_analysis.hpp"
#include "restless/random.hpp"

namespace restless {

enum class RewardNoise { bernoulli, deterministic };

/// One arm: an irreducible chain over labelled states with mean rewards in
/// [0,1]. An empty `initial` means "start from the stationary law".
struct ArmSpec {
  std::string name;
  std::vector<std::string> labels;
  TransitionMatrix transitions;
  std::vector<double> rewards;
  RewardNoise noise = RewardNoise::bernoulli;
  std::vector<double> initial;
  /// Period the learner may assume (residue colouring); 1 = aperiodic.
  int assumed_period = 1;

  std::size_t state_count() const { return transitions.size(); }
  /// Long-run mean reward of the arm pulled on every step.
  double stationary_mean() const;
  void validate() const;
};

/// A single-state arm with Bernoulli(mean) rewards, the encoding of an i.i.d. arm.
ArmSpec iid_arm(double mean, std::string name = "iid");

/// Two-state chain ((1-a, a), (b, 1-b)) with state labels 0/1.
ArmSpec two_state_arm(double a, double b, std::vector<double> rewards, std::string name = "flip");

/// Deterministic m-cycle 0 -> 1 -> ... -> m-1 -> 0.
ArmSpec cycle_arm(std::size_t m, std::vector<double> rewards, std::string name = "cycle");

struct BanditInstance {
  std::vector<ArmSpec> arms;

  std::size_t arm_count() const { return arms.size(); }
  void validate() const;
};

struct Observation {
  std::int64_t t = 0;
  std::size_t arm = 0;
  std::size_t state = 0;
  double reward = 0.0;
};

/// Last observed state of every arm and the number of steps since it was
/// observed (gap 1 = observed on the previous step).
struct ObservationSummary {
  std::vector<std::size_t> state;
  std::vector<std::int64_t> gap;
};

/// The restless bandit simulator. Every arm's hidden chain advances on every
/// step whichever arm is pulled. Each arm draws from its own random stream and
/// rewards from a separate one, so hidden trajectories do not depend on the
/// action sequence.
class RestlessBandit {
 public:
  RestlessBandit(BanditInstance instance, std::uint64_t seed);

  /// Reveals the chosen arm's current state, draws a reward with mean
  /// r(state), then advances every arm by one transition.
  Observation step(std::size_t arm);

  /// Next step index (starts at 1).
  std::int64_t time() const { return t_; }
  std::size_t arm_count() const { return instance_.arms.size(); }
  const BanditInstance& instance() const { return instance_; }

  /// Throws std::logic_error until every arm has been pulled once.
  ObservationSummary last_observation_summary() const;
  bool all_arms_observed() const;

  /// Hidden state (for tests and diagnostics only).
  std::size_t hidden_state(std::size_t arm) const { return hidden_[arm]; }

 private:
  BanditInstance instance_;
  std::vector<std::vector<std::vector<double>>> cumulative_;
  std::vector<Rng> arm_rng_;
  Rng reward_rng_;
  std::vector<std::size_t> hidden_;
  std::vector<std::size_t> last_state_;
  std::vector<std::int64_t> last_pull_;
  std::int64_t t_ = 1;
};

}  // namespace restless
