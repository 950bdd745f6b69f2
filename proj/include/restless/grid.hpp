#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "restless/learner.hpp"
#include "restless/oracle.hpp"
#include "restless/regret.hpp"
#include "restless/scenario.hpp"

namespace restless {

/// Runs the scenario's algorithm for its horizon on a fresh environment.
LearnerRun run_algorithm(const Scenario& scenario, const Oracle& oracle, RestlessBandit& env);

struct CellResult {
  std::string scenario;
  int replication = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  RegretTrace trace;
  std::size_t episodes = 0;
  std::optional<double> d_eps;
  double wall_seconds = 0.0;
};

/// Seed of replication i: derived from the scenario's master seed.
std::uint64_t replication_seed(const Scenario& scenario, int replication);

CellResult run_cell(const Scenario& scenario, const Oracle& oracle, int replication);

struct ScenarioSummary {
  std::string scenario;
  double rho_star = 0.0;
  double rho_star_tolerance = 0.0;
  double rvi_certificate = 0.0;
  std::optional<double> d_eps;
  double episodes_mean = 0.0;
  double regret_final_mean = 0.0;
  double regret_final_std = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> errors;
  double wall_seconds = 0.0;
};

ScenarioSummary summarize(const Scenario& scenario, const Oracle& oracle, const std::vector<CellResult>& cells);
std::string summary_json(const ScenarioSummary& summary);

/// Runs every (scenario, replication) cell on `workers` threads (0 = one per
/// hardware thread). Writes <out>/<scenario>/rep_<i>.csv and
/// <out>/<scenario>/summary.json. Failed cells are reported, not fatal.
std::vector<ScenarioSummary> run_grid(const std::vector<Scenario>& scenarios, const std::filesystem::path& out,
                                      unsigned workers = 0);

}  // namespace restless
