#include "restless/regret.hpp"

#include "restless/scenario.hpp"

namespace restless {

std::vector<std::int64_t> checkpoint_times(std::int64_t horizon) {
  std::vector<std::int64_t> out;
  for (std::int64_t t = 1; t < horizon; t *= 2) out.push_back(t);
  if (horizon >= 1) out.push_back(horizon);
  return out;
}

RegretTrace compute_regret(const std::vector<double>& rewards, double rho_star, double rho_star_tolerance) {
  RegretTrace trace;
  trace.rho_star = rho_star;
  trace.rho_star_tolerance = rho_star_tolerance;
  const auto times = checkpoint_times(static_cast<std::int64_t>(rewards.size()));
  double cum = 0.0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < rewards.size() && next < times.size(); ++i) {
    cum += rewards[i];
    const auto t = static_cast<std::int64_t>(i + 1);
    if (t == times[next]) {
      trace.checkpoints.push_back({t, cum, static_cast<double>(t) * rho_star - cum});
      ++next;
    }
  }
  return trace;
}

void write_csv(std::ostream& os, const RegretTrace& trace) {
  os << "t,cum_reward,regret\n";
  for (const auto& c : trace.checkpoints)
    os << c.t << "," << format_number(c.cum_reward) << "," << format_number(c.regret) << "\n";
}

}  // namespace restless
