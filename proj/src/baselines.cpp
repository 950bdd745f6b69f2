#include "restless/baselines.hpp"

#include <stdexcept>

namespace restless {

std::size_t best_fixed_arm(const BanditInstance& instance) {
  std::size_t best = 0;
  double value = -1.0;
  for (std::size_t j = 0; j < instance.arms.size(); ++j) {
    const double m = instance.arms[j].stationary_mean();
    if (m > value + 1e-12) {
      value = m;
      best = j;
    }
  }
  return best;
}

double best_fixed_arm_gain(const BanditInstance& instance) {
  return instance.arms.at(best_fixed_arm(instance)).stationary_mean();
}

Policy fixed_arm_policy(const MetaStateSpace& space, std::size_t arm) {
  if (arm >= space.arm_count()) throw std::out_of_range("fixed_arm_policy: arm out of range");
  return Policy(space.size(), static_cast<std::uint32_t>(arm));
}

std::size_t fresh_arm(const MetaState& x) {
  for (std::size_t j = 0; j < x.gap.size(); ++j)
    if (x.gap[j] == 1) return j;
  throw std::logic_error("meta-state without a fresh arm");
}

Policy round_robin_policy(const MetaStateSpace& space) {
  Policy p(space.size());
  for (std::size_t x = 0; x < space.size(); ++x)
    p[x] = static_cast<std::uint32_t>((fresh_arm(space.state(x)) + 1) % space.arm_count());
  return p;
}

Policy myopic_policy(const StructuredMdp& mdp) {
  const auto& m = mdp.mdp();
  Policy p(m.state_count(), 0);
  for (std::size_t x = 0; x < m.state_count(); ++x) {
    double best = -1.0;
    for (std::size_t a = 0; a < m.action_count(); ++a)
      if (m.reward(x, a) > best + 1e-12) {
        best = m.reward(x, a);
        p[x] = static_cast<std::uint32_t>(a);
      }
  }
  return p;
}

LearnerRun run_meta_policy(RestlessBandit& env, const MetaStateSpace& space,
                           const std::function<const Policy&(std::size_t start)>& select, std::int64_t horizon) {
  const std::size_t k = env.arm_count();
  if (space.arm_count() != k) throw std::invalid_argument("run_meta_policy: arm count mismatch");
  LearnerRun run;
  run.rewards.reserve(static_cast<std::size_t>(std::max<std::int64_t>(horizon, 0)));
  std::int64_t used = 0;
  for (std::size_t j = 0; j < k && used < horizon; ++j, ++used) run.rewards.push_back(env.step(j).reward);
  if (used >= horizon) return run;
  std::size_t x = space.encode(env.last_observation_summary());
  const Policy& policy = select(x);
  if (policy.size() != space.size()) throw std::invalid_argument("run_meta_policy: policy size mismatch");
  for (; used < horizon; ++used) {
    const auto a = policy[x];
    const auto obs = env.step(a);
    run.rewards.push_back(obs.reward);
    x = space.successors(x, a)[obs.state];
  }
  return run;
}

}  // namespace restless
