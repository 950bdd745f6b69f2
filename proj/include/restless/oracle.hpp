#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "restless/bandit_env.hpp"
#include "restless/solver.hpp"
#include "restless/structured_mdp.hpp"

namespace restless {

/// Optimal average reward on the part of the model reachable from a start
/// meta-state.
struct OracleSolution {
  double rho = 0.0;
  /// RVI certificate: |rho - true gain| <= certificate.
  double certificate = 0.0;
  /// Optimal policy over the full meta-state space (arm 0 off the reachable set).
  Policy policy;
  std::vector<std::uint32_t> states;
  std::size_t iterations = 0;
};

/// Known-model planner on the aggregated structured MDP at eps_oracle.
/// Arm periods are read from the chains. Thread-safe.
class Oracle {
 public:
  Oracle(const BanditInstance& instance, double epsilon,
         std::size_t size_limit = MetaStateSpace::kDefaultSizeLimit);

  const BanditInstance& instance() const { return instance_; }
  const MetaStateSpace& space() const { return *space_; }
  const StructuredMdp& mdp() const { return *mdp_; }
  double epsilon() const { return epsilon_; }
  /// Every meta-state reachable from every other.
  bool communicating() const { return communicating_; }

  /// Solution for runs whose first meta-state is x (cached per closed class).
  const OracleSolution& solve_from(std::size_t x) const;
  /// Solution from meta-state 0; for communicating models the only one.
  const OracleSolution& solve() const { return solve_from(0); }

  /// D_eps on the states of `solution`, or nothing above `max_states`.
  std::optional<double> diameter(const OracleSolution& solution, std::size_t max_states = 1000) const;

 private:
  BanditInstance instance_;
  double epsilon_;
  std::unique_ptr<MetaStateSpace> space_;
  std::unique_ptr<StructuredMdp> mdp_;
  bool communicating_ = false;
  mutable std::mutex mutex_;
  mutable std::map<std::vector<std::uint32_t>, OracleSolution> cache_;
  mutable std::map<std::vector<std::uint32_t>, std::optional<double>> diameters_;
};

}  // namespace restless
