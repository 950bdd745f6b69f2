#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

namespace restless {

struct Checkpoint {
  std::int64_t t = 0;
  double cum_reward = 0.0;
  double regret = 0.0;
};

struct RegretTrace {
  double rho_star = 0.0;
  double rho_star_tolerance = 0.0;
  std::vector<Checkpoint> checkpoints;

  double final_regret() const { return checkpoints.empty() ? 0.0 : checkpoints.back().regret; }
};

/// Powers of two up to T, plus T.
std::vector<std::int64_t> checkpoint_times(std::int64_t horizon);

/// regret(t) = t * rho_star - sum of the first t rewards, at checkpoint_times.
RegretTrace compute_regret(const std::vector<double>& rewards, double rho_star, double rho_star_tolerance = 0.0);

/// CSV with header t,cum_reward,regret.
void write_csv(std::ostream& os, const RegretTrace& trace);

}  // namespace restless
