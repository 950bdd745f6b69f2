#pragma once

#include <optional>
#include <string>
#include <vector>

#include "restless/bandit_env.hpp"
#include "restless/oracle.hpp"

namespace restless {

/// Meta-states from which a run starts: after the initial sweep over arms
/// 0..K-1 the gaps are (K, K-1, ..., 1).
std::vector<std::uint32_t> sweep_start_states(const MetaStateSpace& space);

/// States reachable under `policy` from any sweep start state.
std::vector<std::uint32_t> policy_reachable(const Oracle& oracle, const Policy& policy);

/// Q(x, a) = r(x, a) + sum p(y | x, a) h(y).
double q_value(const Mdp& mdp, const std::vector<double>& bias, std::size_t x, std::size_t a);

struct ExplorationState {
  std::size_t state = 0;
  MetaState label;
  std::size_t chosen = 0;
  double chosen_reward = 0.0;
  double best_reward = 0.0;
};

/// pi*-reachable meta-states where pi* pulls an arm with strictly smaller
/// immediate expected reward than some other arm.
std::vector<ExplorationState> exploring_states(const Oracle& oracle, double margin = 1e-9);

struct WitnessReport {
  bool found = false;
  std::size_t instances_tried = 0;
  std::string description;
  BanditInstance full, base;
  MetaState x_full, x_base;
  std::size_t action_full = 0, action_base = 0;  // arm indices in the full instance
  double rho_full = 0.0, rho_base = 0.0;
  double forced_full = 0.0, forced_base = 0.0;  // best gain with the other choice forced
  double margin_full = 0.0, margin_base = 0.0;  // Q-value margins
  bool base_brute_force = false;
  double base_brute_force_gain = 0.0;
};

/// Searches small instances (L, C, R) from a fixed parameter grid for
/// meta-states where the optimal choice between L and R flips when C is
/// removed although L's and R's own histories are identical.
WitnessReport index_suboptimality_search(std::size_t budget, double epsilon = 0.05);

std::string describe_witness(const WitnessReport& report);

}  // namespace restless
