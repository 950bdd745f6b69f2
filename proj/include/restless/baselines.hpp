#pragma once

#include <functional>

#include "restless/bandit_env.hpp"
#include "restless/learner.hpp"
#include "restless/structured_mdp.hpp"

namespace restless {

/// Arm with the largest stationary mean (lowest index on ties).
std::size_t best_fixed_arm(const BanditInstance& instance);
double best_fixed_arm_gain(const BanditInstance& instance);

Policy fixed_arm_policy(const MetaStateSpace& space, std::size_t arm);
/// Pulls the arm after the one pulled last.
Policy round_robin_policy(const MetaStateSpace& space);
/// Largest immediate expected reward (lowest index on ties).
Policy myopic_policy(const StructuredMdp& mdp);

/// Index of the arm with gap 1 in meta-state x.
std::size_t fresh_arm(const MetaState& x);

/// Initial sweep, then follows a policy over `space`. `select` receives the
/// first meta-state and returns the policy to follow.
LearnerRun run_meta_policy(RestlessBandit& env, const MetaStateSpace& space,
                           const std::function<const Policy&(std::size_t start)>& select, std::int64_t horizon);

}  // namespace restless
