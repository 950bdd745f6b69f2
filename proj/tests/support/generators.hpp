#pragma once

// Hand-rolled generators for property tests and the acceptance suite.

#include <algorithm>
#include <numeric>
#include <vector>

#include "restless/bandit_env.hpp"
#include "restless/random.hpp"

namespace restless::testing {

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

inline std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.next() % (hi - lo + 1));
}

// Irreducible aperiodic chain: a random Hamiltonian cycle, a self-loop on
// one state and extra random edges, with weights in [0.05, 1].
inline TransitionMatrix random_aperiodic_chain(Rng& rng, std::size_t n, double extra_edge_prob = 0.3) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, 0, i - 1)]);
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) w[order[i]][order[(i + 1) % n]] = uniform(rng, 0.05, 1.0);
  w[order[0]][order[0]] = uniform(rng, 0.05, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (w[i][j] == 0.0 && rng.bernoulli(extra_edge_prob)) w[i][j] = uniform(rng, 0.05, 1.0);
  for (auto& row : w) {
    const double s = std::accumulate(row.begin(), row.end(), 0.0);
    for (auto& v : row) v /= s;
  }
  return TransitionMatrix(w);
}

inline ArmSpec random_arm(Rng& rng, std::size_t n, const std::string& name) {
  std::vector<double> rewards(n);
  for (auto& r : rewards) r = uniform(rng, 0.0, 1.0);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  return ArmSpec{name, labels, random_aperiodic_chain(rng, n), rewards, RewardNoise::bernoulli, {}, 1};
}

inline BanditInstance random_instance(Rng& rng, std::size_t arms, std::size_t min_states, std::size_t max_states) {
  BanditInstance instance;
  for (std::size_t j = 0; j < arms; ++j)
    instance.arms.push_back(random_arm(rng, uniform_index(rng, min_states, max_states), "arm" + std::to_string(j)));
  return instance;
}

inline ArmSpec channel(double p, const std::string& name) {
  auto arm = two_state_arm(p, p, {0.0, 1.0}, name);
  arm.noise = RewardNoise::deterministic;
  return arm;
}

// Two channels flipping with probability p.
inline BanditInstance example1(double p) { return BanditInstance{{channel(p, "ch1"), channel(p, "ch2")}}; }

// A channel next to a fair coin.
inline BanditInstance example3(double p) { return BanditInstance{{channel(p, "ch1"), iid_arm(0.5, "coin")}}; }

}  // namespace restless::testing
