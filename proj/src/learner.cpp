#include "restless/learner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace restless {

ConfidenceRadii confidence_radii(std::int64_t visits, std::int64_t t_k, double delta, std::size_t colors,
                                 std::size_t support, double epsilon) {
  if (t_k < 1 || colors < 1 || !(delta > 0.0)) throw std::invalid_argument("confidence_radii: invalid arguments");
  const double n = static_cast<double>(std::max<std::int64_t>(1, visits));
  const double c = static_cast<double>(colors), t = static_cast<double>(t_k);
  ConfidenceRadii r;
  r.reward = epsilon + std::sqrt(7.0 * std::log(2.0 * c * t / delta) / (2.0 * n));
  r.transition = epsilon + std::sqrt(56.0 * static_cast<double>(support) * std::log(4.0 * c * t / delta) / n);
  return r;
}

ColorStats::ColorStats(const ColoredSkeleton& skeleton)
    : prior_(skeleton.color_count, 0),
      episode_(skeleton.color_count, 0),
      reward_sum_(skeleton.color_count, 0.0),
      offset_(skeleton.color_count, 0),
      landings_(skeleton.landing_count) {
  std::uint32_t offset = 0;
  for (std::size_t c = 0; c < landings_.size(); ++c) {
    offset_[c] = offset;
    offset += landings_[c];
  }
  counts_.assign(offset, 0);
}

void ColorStats::record(std::size_t color, std::size_t landing, double reward) {
  if (landing >= landings_[color]) throw std::out_of_range("ColorStats::record: landing index out of range");
  ++episode_[color];
  reward_sum_[color] += reward;
  ++counts_[offset_[color] + landing];
}

void ColorStats::load(std::size_t c, std::int64_t visits, double reward_sum, std::span<const std::int64_t> counts) {
  if (counts.size() > landings_[c]) throw std::invalid_argument("ColorStats::load: too many landing counts");
  prior_[c] = visits;
  episode_[c] = 0;
  reward_sum_[c] = reward_sum;
  std::fill_n(counts_.begin() + offset_[c], landings_[c], 0);
  std::copy(counts.begin(), counts.end(), counts_.begin() + offset_[c]);
}

void ColorStats::start_episode() {
  for (std::size_t c = 0; c < prior_.size(); ++c) {
    prior_[c] += episode_[c];
    episode_[c] = 0;
  }
}

double ColorStats::reward_estimate(std::size_t c) const {
  const auto n = prior_[c] + episode_[c];
  return n > 0 ? reward_sum_[c] / static_cast<double>(n) : 0.0;
}

std::vector<double> ColorStats::transition_estimate(std::size_t c) const {
  const auto n = prior_[c] + episode_[c];
  std::vector<double> p(landings_[c], 1.0 / static_cast<double>(landings_[c]));
  if (n > 0)
    for (std::size_t l = 0; l < p.size(); ++l)
      p[l] = static_cast<double>(counts_[offset_[c] + l]) / static_cast<double>(n);
  return p;
}

PlausibleSet ColorStats::plausible_set(std::int64_t t_k, double delta, std::size_t support, double epsilon) const {
  const std::size_t colors = prior_.size();
  PlausibleSet out;
  out.reward_center.resize(colors);
  out.reward_radius.resize(colors);
  out.transition_radius.resize(colors);
  out.center_offset = offset_;
  out.transition_center.resize(counts_.size());
  for (std::size_t c = 0; c < colors; ++c) {
    const auto radii = confidence_radii(prior_[c] + episode_[c], t_k, delta, colors, support, epsilon);
    out.reward_center[c] = std::clamp(reward_estimate(c), 0.0, 1.0);
    out.reward_radius[c] = radii.reward;
    out.transition_radius[c] = radii.transition;
    const auto p = transition_estimate(c);
    std::copy(p.begin(), p.end(), out.transition_center.begin() + offset_[c]);
  }
  return out;
}

double episode_bound(std::size_t colors, std::int64_t horizon) {
  const double c = static_cast<double>(colors);
  return c * std::log2(8.0 * static_cast<double>(horizon) / c);
}

LayoutFunction known_mixing_layouts(const BanditInstance& instance, bool use_assumed_period) {
  return [arms = instance.arms, use_assumed_period](double epsilon) {
    std::vector<ArmLayout> out;
    for (const auto& arm : arms) {
      ArmLayout layout;
      layout.states = arm.state_count();
      const int m = period(arm.transitions);
      if (m > 1 && !(use_assumed_period && arm.assumed_period > 1))
        throw ValidationError("arm '" + arm.name + "' is periodic but no period is configured for the learner");
      if (use_assumed_period && arm.assumed_period > 1) {
        layout.period = arm.assumed_period;
        layout.cap = static_cast<int>(cyclic_mixing_time(arm.transitions, epsilon));
      } else {
        layout.cap = static_cast<int>(mixing_time(arm.transitions, epsilon));
      }
      out.push_back(layout);
    }
    return out;
  };
}

LearnerConfig restless_config(std::int64_t horizon, double delta, const LayoutFunction& layouts) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  LearnerConfig config;
  config.delta = delta;
  config.horizon = horizon;
  config.epsilon = 1.0 / std::sqrt(static_cast<double>(horizon));
  config.layouts = layouts(config.epsilon);
  return config;
}

LearnerRun run_colored_ucrl2(RestlessBandit& env, const LearnerConfig& config, const EpisodeObserver& observer) {
  const std::size_t k = env.arm_count();
  if (config.layouts.size() != k) throw std::invalid_argument("learner layouts do not match the arm count");
  if (!(config.delta > 0.0 && config.delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  for (std::size_t j = 0; j < k; ++j)
    if (config.layouts[j].states != env.instance().arms[j].state_count())
      throw std::invalid_argument("learner state count does not match the environment");

  const MetaStateSpace space(config.layouts, config.size_limit);
  ColorStats stats(space.skeleton());
  const std::size_t colors = space.color_count();
  const std::size_t support = space.support_bound();
  const std::int64_t horizon = config.horizon;

  LearnerRun run;
  run.colors = colors;
  run.rewards.reserve(static_cast<std::size_t>(std::max<std::int64_t>(horizon, 0)));
  std::int64_t used = 0;
  for (std::size_t j = 0; j < k && used < horizon; ++j, ++used) run.rewards.push_back(env.step(j).reward);
  if (used >= horizon) return run;

  std::size_t x = space.encode(env.last_observation_summary());
  std::vector<double> warm;
  std::int64_t episode = 0;
  while (used < horizon) {
    ++episode;
    stats.start_episode();
    const std::int64_t t_k = used + 1;
    const auto plausible = stats.plausible_set(t_k, config.delta, support, config.epsilon);
    IterationOptions options;
    options.tolerance = config.evi_tolerance > 0.0 ? config.evi_tolerance : 1.0 / std::sqrt(static_cast<double>(t_k));
    options.max_iterations = config.evi_max_iterations;
    options.warm_start = warm.empty() ? nullptr : &warm;
    PlanResult plan;
    try {
      plan = extended_value_iteration(space.skeleton(), plausible, options, config.support);
    } catch (const NumericalError& e) {
      std::ostringstream os;
      os << "episode " << episode << " (t_k = " << t_k << "): " << e.what();
      throw NumericalError(os.str());
    }
    if (observer) observer(EpisodeStart{episode, t_k, &space, &stats, &plausible, &plan, x});

    EpisodeLog log;
    log.k = episode;
    log.t_k = t_k;
    log.optimistic_gain = plan.gain;
    log.evi_iterations = plan.iterations;
    while (used < horizon) {
      const auto a = plan.policy[x];
      const auto c = space.color(x, a);
      if (episode_should_end(stats.prior_visits(c), stats.episode_visits(c))) {
        log.terminating_color = c;
        break;
      }
      const auto obs = env.step(a);
      ++used;
      ++log.length;
      run.rewards.push_back(obs.reward);
      stats.record(c, obs.state, obs.reward);
      x = space.successors(x, a)[obs.state];
    }
    run.episodes.push_back(log);
    warm = std::move(plan.bias);
  }

  if (config.check_episode_bound && horizon >= static_cast<std::int64_t>(colors)) {
    const double bound = episode_bound(colors, horizon);
    if (static_cast<double>(episode) > bound) {
      std::ostringstream os;
      os << "episode count " << episode << " exceeds the bound " << bound << " (C = " << colors << ", T = " << horizon
         << ")";
      throw std::logic_error(os.str());
    }
  }
  return run;
}

}  // namespace restless
