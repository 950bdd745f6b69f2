#include "restless/oracle.hpp"

#include <algorithm>

namespace restless {

namespace {

bool strongly_connected(const Mdp& mdp) {
  const std::size_t n = mdp.state_count();
  if (reachable_states(mdp, 0).size() != n) return false;
  std::vector<std::vector<std::uint32_t>> reverse(n);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t a = 0; a < mdp.action_count(); ++a)
      for (const auto& tr : mdp.transitions(s, a))
        if (tr.prob > 0.0) reverse[tr.to].push_back(static_cast<std::uint32_t>(s));
  std::vector<bool> seen(n, false);
  std::vector<std::uint32_t> queue{0};
  seen[0] = true;
  for (std::size_t head = 0; head < queue.size(); ++head)
    for (auto p : reverse[queue[head]])
      if (!seen[p]) {
        seen[p] = true;
        queue.push_back(p);
      }
  return queue.size() == n;
}

}  // namespace

Oracle::Oracle(const BanditInstance& instance, double epsilon, std::size_t size_limit)
    : instance_(instance), epsilon_(epsilon) {
  instance_.validate();
  space_ = std::make_unique<MetaStateSpace>(mixing_layouts(instance_.arms, epsilon), size_limit);
  mdp_ = std::make_unique<StructuredMdp>(build_structured_mdp(instance_.arms, *space_, epsilon));
  communicating_ = strongly_connected(mdp_->mdp());
}

const OracleSolution& Oracle::solve_from(std::size_t x) const {
  const auto& full = mdp_->mdp();
  auto states = communicating_ ? std::vector<std::uint32_t>{} : reachable_states(full, x);
  std::lock_guard lock(mutex_);
  if (auto it = cache_.find(states); it != cache_.end()) return it->second;

  OracleSolution sol;
  IterationOptions options;
  options.tolerance = 1e-9;
  options.max_iterations = 1'000'000;
  PlanResult plan;
  if (communicating_) {
    plan = relative_value_iteration(full, options);
    sol.policy = plan.policy;
    sol.states.resize(full.state_count());
    for (std::size_t s = 0; s < sol.states.size(); ++s) sol.states[s] = static_cast<std::uint32_t>(s);
  } else {
    plan = relative_value_iteration(restrict_mdp(full, states), options);
    sol.policy.assign(full.state_count(), 0);
    for (std::size_t i = 0; i < states.size(); ++i) sol.policy[states[i]] = plan.policy[i];
    sol.states = states;
  }
  sol.rho = plan.gain;
  sol.certificate = plan.gain_tolerance;
  sol.iterations = plan.iterations;
  return cache_.emplace(std::move(states), std::move(sol)).first->second;
}

std::optional<double> Oracle::diameter(const OracleSolution& solution, std::size_t max_states) const {
  if (solution.states.size() > max_states) return std::nullopt;
  std::lock_guard lock(mutex_);
  if (auto it = diameters_.find(solution.states); it != diameters_.end()) return it->second;
  const auto& full = mdp_->mdp();
  const double d = solution.states.size() == full.state_count() ? mdp_diameter(full)
                                                                : mdp_diameter(restrict_mdp(full, solution.states));
  diameters_.emplace(solution.states, d);
  return d;
}

}  // namespace restless
