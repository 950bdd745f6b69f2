// Command-line front end: run scenario grids, print oracle and chain
// reports, search for index-policy counterexamples.
#include <cmath>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "restless/baselines.hpp"
#include "restless/grid.hpp"
#include "restless/scenario.hpp"
#include "restless/witness.hpp"

using namespace restless;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> eps_oracle;
  std::optional<int> replications;
};

Scenario load_with(const std::string& path, const Overrides& o) {
  auto sc = load_scenario(path);
  if (o.seed) sc.seed = *o.seed;
  if (o.eps_oracle) sc.eps_oracle = *o.eps_oracle;
  if (o.replications) sc.replications = *o.replications;
  sc.validate();
  return sc;
}

int cmd_run(const std::vector<std::string>& files, const Overrides& o, const std::string& out, unsigned workers) {
  std::vector<Scenario> scenarios;
  for (const auto& f : files) scenarios.push_back(load_with(f, o));
  const auto summaries = run_grid(scenarios, out, workers);
  int failures = 0;
  for (const auto& s : summaries) {
    std::printf("%-24s rho*=%.6f  regret mean=%.2f sd=%.2f  episodes=%.1f  (%zu seeds)\n", s.scenario.c_str(),
                s.rho_star, s.regret_final_mean, s.regret_final_std, s.episodes_mean, s.seeds.size());
    for (const auto& e : s.errors) std::printf("  error: %s\n", e.c_str());
    failures += static_cast<int>(s.errors.size());
  }
  return failures ? 1 : 0;
}

int cmd_oracle(const std::string& file, const Overrides& o) {
  const auto sc = load_with(file, o);
  const Oracle oracle(sc.instance, sc.eps_oracle);
  const auto layouts = mixing_layouts(sc.instance.arms, sc.eps_oracle);
  std::printf("scenario %s, eps_oracle %g\n", sc.name.c_str(), sc.eps_oracle);
  for (std::size_t j = 0; j < layouts.size(); ++j)
    std::printf("  arm %-12s T_mix(eps)=%d period=%d stationary mean=%.6f\n", sc.instance.arms[j].name.c_str(),
                layouts[j].cap, layouts[j].period, sc.instance.arms[j].stationary_mean());
  std::printf("meta-states %zu, colours %zu, communicating %s\n", oracle.space().size(), oracle.space().color_count(),
              oracle.communicating() ? "yes" : "no");
  for (auto start : sweep_start_states(oracle.space())) {
    const auto& sol = oracle.solve_from(start);
    const auto d = oracle.diameter(sol);
    std::vector<std::size_t> pulls(oracle.space().arm_count(), 0);
    const auto reach = reachable_states(oracle.mdp().mdp(), start, sol.policy);
    for (auto x : reach) ++pulls[sol.policy[x]];
    std::printf("from start %zu: rho*=%.9f (+-%.1e)  D_eps=%s  pi* reachable states %zu, arm choices:", static_cast<std::size_t>(start),
                sol.rho, sol.certificate, d ? std::to_string(*d).c_str() : "n/a", reach.size());
    for (auto p : pulls) std::printf(" %zu", p);
    std::printf("\n");
    if (oracle.communicating()) break;
  }
  std::printf("best fixed arm: %zu (gain %.6f)\n", best_fixed_arm(sc.instance), best_fixed_arm_gain(sc.instance));
  return 0;
}

int cmd_analyze(const std::string& file, const Overrides& o) {
  const auto sc = load_with(file, o);
  for (const auto& arm : sc.instance.arms) {
    const auto profile = analyze_chain(arm.transitions);
    std::printf("arm %s: %zu states, period %d, diameter %.6f, T_mix(1/4) %llu\n", arm.name.c_str(), arm.state_count(),
                profile.period, profile.diameter, static_cast<unsigned long long>(profile.mix_quarter));
    std::printf("  stationary:");
    for (double v : profile.stationary) std::printf(" %.6f", v);
    std::printf("\n  mean reward %.6f\n", arm.stationary_mean());
    for (double eps : {1.0 / 8, 1.0 / 64, sc.eps_oracle}) {
      const auto t = profile.period == 1 ? mixing_time(arm.transitions, eps) : cyclic_mixing_time(arm.transitions, eps);
      std::printf("  T_mix(%g) = %llu\n", eps, static_cast<unsigned long long>(t));
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Restless Markov bandit laboratory"};
  app.require_subcommand(1);
  Overrides o;
  std::uint64_t seed = 0;
  double eps = 0.0;
  int reps = 0;
  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--eps-oracle", eps, "aggregation parameter of the oracle");
    cmd->add_option("--replications", reps, "replications per scenario");
  };

  std::vector<std::string> files;
  std::string out = "results";
  unsigned workers = 0;
  auto* run = app.add_subcommand("run", "run scenarios and write CSV/JSON results");
  run->add_option("scenarios", files, "scenario files")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory");
  run->add_option("--workers", workers, "worker threads (0 = all cores)");
  add_overrides(run);

  std::string file;
  auto* oracle = app.add_subcommand("oracle", "print rho*, D_eps and mixing times");
  oracle->add_option("scenario", file)->required()->check(CLI::ExistingFile);
  add_overrides(oracle);

  auto* analyze = app.add_subcommand("analyze", "per-arm chain report");
  analyze->add_option("scenario", file)->required()->check(CLI::ExistingFile);
  add_overrides(analyze);

  std::size_t budget = 20000;
  double witness_eps = 0.05;
  auto* witness = app.add_subcommand("search-witness", "search for index-policy counterexamples");
  witness->add_option("--budget", budget, "instances to try");
  witness->add_option("--eps", witness_eps, "aggregation parameter");

  CLI11_PARSE(app, argc, argv);
  for (auto* cmd : {run, oracle, analyze}) {
    if (cmd->count("--seed")) o.seed = seed;
    if (cmd->count("--eps-oracle")) o.eps_oracle = eps;
    if (cmd->count("--replications")) o.replications = reps;
  }
  try {
    if (*run) return cmd_run(files, o, out, workers);
    if (*oracle) return cmd_oracle(file, o);
    if (*analyze) return cmd_analyze(file, o);
    if (*witness) {
      const auto report = index_suboptimality_search(budget, witness_eps);
      std::printf("%s\n", describe_witness(report).c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
