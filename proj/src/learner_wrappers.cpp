#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "restless/learner.hpp"

namespace restless {

namespace {

void append(LearnerRun& into, LearnerRun&& part, std::int64_t offset) {
  into.rewards.insert(into.rewards.end(), part.rewards.begin(), part.rewards.end());
  for (auto log : part.episodes) {
    log.t_k += offset;
    into.episodes.push_back(log);
  }
  into.colors = std::max(into.colors, part.colors);
}

template <class ConfigFor>
LearnerRun run_rounds(RestlessBandit& env, std::int64_t total_steps, double delta, std::vector<RoundInfo>* rounds,
                      ConfigFor&& config_for) {
  LearnerRun out;
  std::int64_t used = 0;
  for (int i = 1; used < total_steps; ++i) {
    if (i > 62) throw std::overflow_error("doubling rounds overflow");
    const std::int64_t nominal = std::int64_t{1} << i;
    LearnerConfig config = config_for(i, nominal, delta / static_cast<double>(nominal));
    config.horizon = std::min(nominal, total_steps - used);
    if (rounds) rounds->push_back(RoundInfo{i, config.horizon, config.delta, config.epsilon, config.layouts});
    append(out, run_colored_ucrl2(env, config), used);
    used += config.horizon;
  }
  return out;
}

}  // namespace

LearnerRun run_with_doubling(RestlessBandit& env, std::int64_t total_steps, double delta,
                             const LayoutFunction& layouts, std::vector<RoundInfo>* rounds) {
  return run_rounds(env, total_steps, delta, rounds, [&](int, std::int64_t nominal, double round_delta) {
    return restless_config(nominal, round_delta, layouts);
  });
}

int mixing_guess(std::int64_t t) {
  if (t < 1) throw std::invalid_argument("mixing_guess: t must be >= 1");
  return std::max(1, static_cast<int>(std::ceil(std::log(static_cast<double>(t)) - 1e-12)));
}

LearnerRun run_with_mixing_guess(RestlessBandit& env, std::int64_t total_steps, double delta, std::vector<int> periods,
                                 std::vector<RoundInfo>* rounds) {
  const std::size_t k = env.arm_count();
  periods.resize(k, 1);
  return run_rounds(env, total_steps, delta, rounds, [&](int, std::int64_t nominal, double round_delta) {
    const int guess = mixing_guess(nominal);
    const LayoutFunction layouts = [&](double epsilon) {
      const int factor = std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / epsilon) - 1e-12)));
      std::vector<ArmLayout> out;
      for (std::size_t j = 0; j < k; ++j) {
        ArmLayout layout;
        layout.states = env.instance().arms[j].state_count();
        layout.cap = factor * guess;
        layout.period = std::max(1, periods[j]);
        out.push_back(layout);
      }
      return out;
    };
    return restless_config(nominal, round_delta, layouts);
  });
}

namespace {

struct DiscoveredColor {
  std::int64_t visits = 0;
  double reward_sum = 0.0;
  std::vector<std::int64_t> counts;
};

// Learner-side view of the arms: environment state -> discovery index.
class Discovery {
 public:
  Discovery(std::size_t arms, const std::function<int(std::size_t)>& caps) : local_(arms), caps_(caps) {}

  // Returns true when the state is new.
  bool see(std::size_t arm, std::size_t state) {
    auto& m = local_[arm];
    if (m.count(state)) return false;
    const auto next = m.size();
    m.emplace(state, next);
    return true;
  }
  std::size_t local(std::size_t arm, std::size_t state) const { return local_[arm].at(state); }
  std::size_t known(std::size_t arm) const { return local_[arm].size(); }

  std::vector<ArmLayout> layouts() const {
    std::vector<ArmLayout> out;
    for (std::size_t j = 0; j < local_.size(); ++j) {
      ArmLayout layout;
      layout.states = std::max<std::size_t>(1, local_[j].size());
      layout.cap = std::max(1, caps_(j));
      out.push_back(layout);
    }
    return out;
  }

  ObservationSummary translate(ObservationSummary summary) const {
    for (std::size_t j = 0; j < summary.state.size(); ++j) summary.state[j] = local(j, summary.state[j]);
    return summary;
  }

 private:
  std::vector<std::map<std::size_t, std::size_t>> local_;
  std::function<int(std::size_t)> caps_;
};

}  // namespace

LearnerRun run_with_state_discovery(RestlessBandit& env, std::int64_t horizon, double delta,
                                    const std::function<int(std::size_t)>& caps, BallSupport support) {
  const std::size_t k = env.arm_count();
  Discovery discovery(k, caps);
  std::map<ColorKey, DiscoveredColor> totals;
  LearnerRun run;
  std::int64_t used = 0;

  for (std::size_t j = 0; j < k && used < horizon; ++j, ++used) {
    const auto obs = env.step(j);
    discovery.see(j, obs.state);
    run.rewards.push_back(obs.reward);
  }
  if (used >= horizon) return run;

  auto space = std::make_unique<MetaStateSpace>(discovery.layouts());
  std::size_t x = space->encode(discovery.translate(env.last_observation_summary()));

  // One step outside an episode: record the sample and keep the space current.
  auto explore_step = [&](std::size_t arm) {
    const auto key = space->color_of(x, arm);
    const auto obs = env.step(arm);
    ++used;
    run.rewards.push_back(obs.reward);
    const bool fresh = discovery.see(arm, obs.state);
    auto& entry = totals[key];
    entry.visits += 1;
    entry.reward_sum += obs.reward;
    const auto l = discovery.local(arm, obs.state);
    if (entry.counts.size() <= l) entry.counts.resize(l + 1, 0);
    entry.counts[l] += 1;
    if (fresh) space = std::make_unique<MetaStateSpace>(discovery.layouts());
    x = space->encode(discovery.translate(env.last_observation_summary()));
    return obs.state;
  };

  std::vector<double> warm;
  std::int64_t episode = 0;
  while (used < horizon) {
    // Exploration phase.
    std::vector<std::int64_t> phase(k, 0);
    for (std::size_t j = 0; j < k && used < horizon; ++j) {
      std::vector<bool> seen;
      std::size_t seen_count = 0;
      while (used < horizon) {
        if (seen.size() < discovery.known(j)) seen.resize(discovery.known(j), false);
        if (seen_count == discovery.known(j)) break;
        const auto state = explore_step(j);
        ++phase[j];
        const auto l = discovery.local(j, state);
        if (seen.size() <= l) seen.resize(l + 1, false);
        if (!seen[l]) {
          seen[l] = true;
          ++seen_count;
        }
      }
    }
    for (auto s : phase) run.exploration_steps += s;
    run.phase_steps.push_back(std::move(phase));
    if (used >= horizon) break;

    // Episode on the current space.
    ++episode;
    ColorStats stats(space->skeleton());
    for (std::size_t c = 0; c < space->color_count(); ++c) {
      const auto it = totals.find(space->color_key(c));
      if (it != totals.end()) stats.load(c, it->second.visits, it->second.reward_sum, it->second.counts);
    }
    const std::int64_t t_k = used + 1;
    const auto plausible = stats.plausible_set(t_k, delta, space->support_bound(), 0.0);
    IterationOptions options;
    options.tolerance = 1.0 / std::sqrt(static_cast<double>(t_k));
    options.max_iterations = 200'000;
    if (warm.size() == space->size()) options.warm_start = &warm;
    auto plan = extended_value_iteration(space->skeleton(), plausible, options, support);

    EpisodeLog log;
    log.k = episode;
    log.t_k = t_k;
    log.optimistic_gain = plan.gain;
    log.evi_iterations = plan.iterations;
    // A newly discovered state ends the episode: the plan does not cover it.
    std::optional<std::pair<ColorKey, std::pair<std::size_t, double>>> pending;
    while (used < horizon && !pending) {
      const auto a = plan.policy[x];
      const auto c = space->color(x, a);
      if (episode_should_end(stats.prior_visits(c), stats.episode_visits(c))) {
        log.terminating_color = c;
        break;
      }
      const auto obs = env.step(a);
      ++used;
      ++log.length;
      run.rewards.push_back(obs.reward);
      const bool fresh = discovery.see(a, obs.state);
      const auto l = discovery.local(a, obs.state);
      if (fresh) {
        pending.emplace(space->color_key(c), std::make_pair(l, obs.reward));
      } else {
        stats.record(c, l, obs.reward);
        x = space->successors(x, a)[l];
      }
    }
    // Write the episode's samples back.
    for (std::size_t c = 0; c < space->color_count(); ++c) {
      const auto v = stats.episode_visits(c);
      if (v == 0) continue;
      auto& entry = totals[space->color_key(c)];
      const auto counts = stats.landing_counts(c);
      entry.visits = stats.prior_visits(c) + v;
      entry.reward_sum = stats.reward_sum(c);
      if (entry.counts.size() < counts.size()) entry.counts.resize(counts.size(), 0);
      for (std::size_t l = 0; l < counts.size(); ++l) entry.counts[l] = counts[l];
    }
    if (pending) {
      auto& entry = totals[pending->first];
      const auto [l, reward] = pending->second;
      entry.visits += 1;
      entry.reward_sum += reward;
      if (entry.counts.size() <= l) entry.counts.resize(l + 1, 0);
      entry.counts[l] += 1;
      space = std::make_unique<MetaStateSpace>(discovery.layouts());
      x = space->encode(discovery.translate(env.last_observation_summary()));
    }
    run.episodes.push_back(log);
    warm = std::move(plan.bias);
  }
  run.colors = space->color_count();
  return run;
}

}  // namespace restless
