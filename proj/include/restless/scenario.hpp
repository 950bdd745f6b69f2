#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "restless/bandit_env.hpp"
#include "restless/solver.hpp"

namespace restless {

enum class Algorithm {
  colored_ucrl2,
  doubling,
  mixing_guess,
  state_discovery,
  best_fixed_arm,
  round_robin,
  myopic,
  oracle_optimal,
};

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

struct Scenario {
  std::string name = "scenario";
  BanditInstance instance;
  std::int64_t horizon = 1000;
  double delta = 0.05;
  Algorithm algorithm = Algorithm::colored_ucrl2;
  int replications = 1;
  std::uint64_t seed = 1;
  double eps_oracle = 1e-3;
  BallSupport support = BallSupport::unrestricted;

  void validate() const;
};

/// Parse error carrying the offending line (0 when not line-specific).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

/// Number in decimal or a/b form.
double parse_number(const std::string& text);
/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");
Scenario load_scenario(const std::filesystem::path& path);
std::string format_scenario(const Scenario& scenario);

}  // namespace restless
