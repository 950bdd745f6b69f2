#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "restless/mdp.hpp"
#include "restless/structured_mdp.hpp"

namespace restless {

struct PlanResult {
  /// Midpoint of the final min/max one-step change of u.
  double gain = 0.0;
  /// Half the final span of Tu - u: the true gain lies within gain +- this.
  double gain_tolerance = 0.0;
  std::vector<double> bias;
  Policy policy;
  std::size_t iterations = 0;
  std::vector<double> span_history;
  bool damped = false;
};

struct IterationOptions {
  double tolerance = 1e-9;
  std::size_t max_iterations = 100'000;
  /// Sweeps without a new minimum span before damping kicks in.
  std::size_t damping_window = 100;
  std::size_t reference_state = 0;
  bool record_history = false;
  /// Optional starting values (same size as the state space).
  const std::vector<double>* warm_start = nullptr;
};

/// Average-reward relative value iteration. Throws NumericalError when the
/// iteration cap is hit.
PlanResult relative_value_iteration(const Mdp& mdp, const IterationOptions& options = {});

/// Confidence set over a coloured skeleton. Centres and radii are per colour;
/// transition centres are landing-indexed.
struct PlausibleSet {
  std::vector<double> reward_center;
  std::vector<double> reward_radius;
  std::vector<double> transition_center;    // flat, per colour
  std::vector<std::uint32_t> center_offset; // per colour
  std::vector<double> transition_radius;

  std::span<const double> center(std::size_t c, std::size_t landings) const {
    return {transition_center.data() + center_offset[c], landings};
  }
};

/// Builds a zero-radius plausible set from a known structured MDP, taking
/// each colour's centre from its first pair.
PlausibleSet plausible_set_from(const StructuredMdp& mdp);

enum class BallSupport {
  /// Mass may be moved to any state of the MDP.
  unrestricted,
  /// Mass stays on the pair's structural successors.
  successors,
};

/// Member of the L1 ball of the given radius around `center` maximising
/// sum p * values. Mass radius/2 is added to the best entry (capped at 1)
/// and removed from the worst entries.
std::vector<double> optimistic_transition(std::span<const double> center, double radius,
                                          std::span<const double> values);

/// Extended value iteration over a plausible set. Returns a policy optimal
/// for the optimistic MDP up to the tolerance.
PlanResult extended_value_iteration(const ColoredSkeleton& skeleton, const PlausibleSet& plausible,
                                    const IterationOptions& options = {},
                                    BallSupport support = BallSupport::unrestricted);

/// Maximum over pairs of states of the least expected hitting time. Values
/// are computed by value iteration to `tolerance`.
double mdp_diameter(const Mdp& mdp, double tolerance = 1e-9, std::size_t max_iterations = 10'000'000);

/// Per-state long-run average reward of a fixed policy (exact evaluation via
/// recurrent classes and absorption probabilities).
std::vector<double> policy_gains(const Mdp& mdp, const Policy& policy);

/// Average reward of `policy` started in `start`.
double policy_average_reward(const Mdp& mdp, const Policy& policy, std::size_t start = 0);

/// Enumerates every deterministic policy (optionally with some actions
/// pinned: `fixed[s] >= 0`) and returns the best gain over policies and
/// their recurrent classes. Throws when more than `budget` policies exist.
PlanResult brute_force_policy_search(const Mdp& mdp, std::size_t budget = 1'000'000,
                                     const std::vector<int>& fixed = {});

/// States reachable from `start` under any action (policy empty) or under
/// the given policy. Sorted.
std::vector<std::uint32_t> reachable_states(const Mdp& mdp, std::size_t start, const Policy& policy = {});

/// Sub-MDP on a closed set of states (sorted); transitions outside the set
/// are an error.
Mdp restrict_mdp(const Mdp& mdp, const std::vector<std::uint32_t>& states);

}  // namespace restless
