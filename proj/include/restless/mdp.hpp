#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace restless {

struct Transition {
  std::uint32_t to = 0;
  double prob = 0.0;
};

/// Deterministic stationary policy: state -> action.
using Policy = std::vector<std::uint32_t>;

/// Finite MDP with sparse transition rows. Every action is available in
/// every state.
class Mdp {
 public:
  Mdp() = default;
  Mdp(std::size_t states, std::size_t actions);

  std::size_t state_count() const { return states_; }
  std::size_t action_count() const { return actions_; }

  double reward(std::size_t s, std::size_t a) const { return reward_[s * actions_ + a]; }
  std::span<const Transition> transitions(std::size_t s, std::size_t a) const { return rows_[s * actions_ + a]; }

  void set(std::size_t s, std::size_t a, double reward, std::vector<Transition> row);

  /// Throws std::logic_error if a row does not sum to 1 within tol or a
  /// reward lies outside [0,1].
  void validate(double tol = 1e-9) const;

 private:
  std::size_t states_ = 0;
  std::size_t actions_ = 0;
  std::vector<double> reward_;
  std::vector<std::vector<Transition>> rows_;
};

}  // namespace restless
