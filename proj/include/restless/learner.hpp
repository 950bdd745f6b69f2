#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "restless/bandit_env.hpp"
#include "restless/solver.hpp"
#include "restless/structured_mdp.hpp"

namespace restless {

struct ConfidenceRadii {
  double reward = 0.0;
  double transition = 0.0;
};

/// Reward and L1 transition radii for a colour with N prior visits. Natural
/// logarithms; N is replaced by max{1, N}.
ConfidenceRadii confidence_radii(std::int64_t visits, std::int64_t t_k, double delta, std::size_t colors,
                                 std::size_t support, double epsilon);

/// True when the colour about to be visited has v >= max{1, N}.
inline bool episode_should_end(std::int64_t prior_visits, std::int64_t episode_visits) {
  return episode_visits >= std::max<std::int64_t>(1, prior_visits);
}

/// Per-colour sample statistics. Landing counts are kept in the colour's
/// landing-state frame, which is shared by all its pairs.
class ColorStats {
 public:
  ColorStats() = default;
  explicit ColorStats(const ColoredSkeleton& skeleton);

  std::size_t color_count() const { return prior_.size(); }
  std::int64_t prior_visits(std::size_t c) const { return prior_[c]; }
  std::int64_t episode_visits(std::size_t c) const { return episode_[c]; }
  double reward_sum(std::size_t c) const { return reward_sum_[c]; }
  std::span<const std::int64_t> landing_counts(std::size_t c) const {
    return {counts_.data() + offset_[c], landings_[c]};
  }

  void record(std::size_t color, std::size_t landing, double reward);
  /// Overwrites colour c with totals gathered elsewhere (as prior visits).
  void load(std::size_t c, std::int64_t visits, double reward_sum, std::span<const std::int64_t> counts);
  /// Folds the episode visits into the prior counts (N += v, v = 0).
  void start_episode();

  double reward_estimate(std::size_t c) const;
  /// Empirical landing law; uniform before the first sample.
  std::vector<double> transition_estimate(std::size_t c) const;

  /// Plausible set from the prior counts.
  PlausibleSet plausible_set(std::int64_t t_k, double delta, std::size_t support, double epsilon) const;

 private:
  std::vector<std::int64_t> prior_, episode_;
  std::vector<double> reward_sum_;
  std::vector<std::int64_t> counts_;
  std::vector<std::uint32_t> offset_, landings_;
};

struct EpisodeLog {
  std::int64_t k = 0;
  std::int64_t t_k = 0;
  double optimistic_gain = 0.0;
  std::size_t evi_iterations = 0;
  /// Colour whose doubling criterion ended the episode (-1 at the horizon).
  std::int64_t terminating_color = -1;
  std::int64_t length = 0;
};

/// Everything an observer sees at an episode start, before the episode runs.
struct EpisodeStart {
  std::int64_t k = 0;
  std::int64_t t_k = 0;
  const MetaStateSpace* space = nullptr;
  const ColorStats* stats = nullptr;
  const PlausibleSet* plausible = nullptr;
  const PlanResult* plan = nullptr;
  std::size_t state = 0;
};

using EpisodeObserver = std::function<void(const EpisodeStart&)>;

struct LearnerConfig {
  double delta = 0.05;
  /// Structuring parameter added to both radii.
  double epsilon = 0.0;
  std::int64_t horizon = 0;
  /// What the learner knows of every arm: state count, cap, period.
  std::vector<ArmLayout> layouts;
  BallSupport support = BallSupport::unrestricted;
  /// EVI stopping tolerance; 0 means 1/sqrt(t_k).
  double evi_tolerance = 0.0;
  std::size_t evi_max_iterations = 200'000;
  bool check_episode_bound = true;
  std::size_t size_limit = MetaStateSpace::kDefaultSizeLimit;
};

/// Maps a structuring parameter to per-arm layouts (known mixing times).
using LayoutFunction = std::function<std::vector<ArmLayout>(double epsilon)>;

/// Layouts with caps T_mix^j(eps) computed from the true chains.
LayoutFunction known_mixing_layouts(const BanditInstance& instance, bool use_assumed_period = true);

/// eps = 1/sqrt(T), caps from `layouts`.
LearnerConfig restless_config(std::int64_t horizon, double delta, const LayoutFunction& layouts);

/// m <= C log2(8T/C); meaningful when T >= C.
double episode_bound(std::size_t colors, std::int64_t horizon);

struct LearnerRun {
  /// Reward of every step, in order.
  std::vector<double> rewards;
  std::vector<EpisodeLog> episodes;
  std::size_t colors = 0;
  std::int64_t exploration_steps = 0;
  /// Exploration steps of each arm in every exploration phase.
  std::vector<std::vector<std::int64_t>> phase_steps;
};

/// The coloured UCRL2 learner: initial sweep over the arms in index order,
/// then optimistic episodes until `config.horizon` steps have been taken
/// (the sweep included). Throws std::logic_error if the episode bound fails.
LearnerRun run_colored_ucrl2(RestlessBandit& env, const LearnerConfig& config, const EpisodeObserver& observer = {});

struct RoundInfo {
  int round = 0;
  std::int64_t length = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  std::vector<ArmLayout> layouts;
};

/// Restarts the learner in rounds of 2^i steps with delta/2^i until
/// `total_steps` are used (the last round is cut short).
LearnerRun run_with_doubling(RestlessBandit& env, std::int64_t total_steps, double delta,
                             const LayoutFunction& layouts, std::vector<RoundInfo>* rounds = nullptr);

/// a(t) = max{1, ceil(ln t)}.
int mixing_guess(std::int64_t t);

/// Doubling rounds where every arm's T_mix is guessed as a(2^i) and caps are
/// ceil(log2(1/eps)) * a(2^i).
LearnerRun run_with_mixing_guess(RestlessBandit& env, std::int64_t total_steps, double delta,
                                 std::vector<int> periods = {}, std::vector<RoundInfo>* rounds = nullptr);

/// Learner that only knows the arm count. Between episodes every arm is
/// pulled repeatedly until each of its known states has been observed in
/// that phase; the meta-state space grows with the discovered states.
/// `caps(j)` gives the cap of arm j.
LearnerRun run_with_state_discovery(RestlessBandit& env, std::int64_t horizon, double delta,
                                    const std::function<int(std::size_t)>& caps,
                                    BallSupport support = BallSupport::unrestricted);

}  // namespace restless
