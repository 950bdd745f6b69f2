#include "restless/grid.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "restless/baselines.hpp"

namespace restless {

LearnerRun run_algorithm(const Scenario& sc, const Oracle& oracle, RestlessBandit& env) {
  const auto& instance = sc.instance;
  const auto layouts = known_mixing_layouts(instance);
  switch (sc.algorithm) {
    case Algorithm::colored_ucrl2: {
      auto config = restless_config(sc.horizon, sc.delta, layouts);
      config.support = sc.support;
      return run_colored_ucrl2(env, config);
    }
    case Algorithm::doubling:
      return run_with_doubling(env, sc.horizon, sc.delta, layouts);
    case Algorithm::mixing_guess: {
      std::vector<int> periods;
      for (const auto& arm : instance.arms) periods.push_back(arm.assumed_period);
      return run_with_mixing_guess(env, sc.horizon, sc.delta, periods);
    }
    case Algorithm::state_discovery: {
      const auto caps = layouts(1.0 / std::sqrt(static_cast<double>(sc.horizon)));
      return run_with_state_discovery(env, sc.horizon, sc.delta, [caps](std::size_t j) { return caps[j].cap; },
                                      sc.support);
    }
    case Algorithm::best_fixed_arm: {
      const auto policy = fixed_arm_policy(oracle.space(), best_fixed_arm(instance));
      return run_meta_policy(env, oracle.space(), [&](std::size_t) -> const Policy& { return policy; }, sc.horizon);
    }
    case Algorithm::round_robin: {
      const auto policy = round_robin_policy(oracle.space());
      return run_meta_policy(env, oracle.space(), [&](std::size_t) -> const Policy& { return policy; }, sc.horizon);
    }
    case Algorithm::myopic: {
      const auto policy = myopic_policy(oracle.mdp());
      return run_meta_policy(env, oracle.space(), [&](std::size_t) -> const Policy& { return policy; }, sc.horizon);
    }
    case Algorithm::oracle_optimal:
      return run_meta_policy(
          env, oracle.space(), [&](std::size_t x) -> const Policy& { return oracle.solve_from(x).policy; },
          sc.horizon);
  }
  throw std::logic_error("unhandled algorithm");
}

std::uint64_t replication_seed(const Scenario& sc, int replication) {
  return derive_seed(sc.seed, static_cast<std::uint64_t>(replication));
}

CellResult run_cell(const Scenario& sc, const Oracle& oracle, int replication) {
  CellResult cell;
  cell.scenario = sc.name;
  cell.replication = replication;
  cell.seed = replication_seed(sc, replication);
  const auto start = std::chrono::steady_clock::now();
  try {
    RestlessBandit env(sc.instance, cell.seed);
    auto run = run_algorithm(sc, oracle, env);
    // The oracle's reference gain is that of the closed class the run lives in.
    const auto x0 = oracle.space().encode(env.last_observation_summary());
    const auto& sol = oracle.solve_from(x0);
    cell.d_eps = oracle.diameter(sol);
    double tolerance = sol.certificate;
    if (cell.d_eps) tolerance += oracle.epsilon() * (*cell.d_eps + 2.0);
    cell.trace = compute_regret(run.rewards, sol.rho, tolerance);
    cell.episodes = run.episodes.size();
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  cell.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cell;
}

ScenarioSummary summarize(const Scenario& sc, const Oracle& oracle, const std::vector<CellResult>& cells) {
  ScenarioSummary s;
  s.scenario = sc.name;
  std::vector<double> finals;
  double episodes = 0.0, rho = 0.0, tol = 0.0;
  for (const auto& c : cells) {
    s.seeds.push_back(c.seed);
    s.wall_seconds += c.wall_seconds;
    if (!c.ok) {
      s.errors.push_back("replication " + std::to_string(c.replication) + ": " + c.error);
      continue;
    }
    finals.push_back(c.trace.final_regret());
    episodes += static_cast<double>(c.episodes);
    rho += c.trace.rho_star;
    tol = std::max(tol, c.trace.rho_star_tolerance);
    if (c.d_eps) s.d_eps = std::max(s.d_eps.value_or(0.0), *c.d_eps);
  }
  const double n = static_cast<double>(finals.size());
  s.rvi_certificate = oracle.solve().certificate;
  if (!finals.empty()) {
    s.rho_star = rho / n;
    s.rho_star_tolerance = tol;
    s.episodes_mean = episodes / n;
    double mean = 0.0;
    for (double f : finals) mean += f;
    mean /= n;
    double var = 0.0;
    for (double f : finals) var += (f - mean) * (f - mean);
    s.regret_final_mean = mean;
    s.regret_final_std = finals.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  }
  return s;
}

std::string summary_json(const ScenarioSummary& s) {
  nlohmann::ordered_json j;
  j["scenario"] = s.scenario;
  j["rho_star"] = s.rho_star;
  j["rho_star_tolerance"] = s.rho_star_tolerance;
  j["d_eps"] = s.d_eps ? nlohmann::ordered_json(*s.d_eps) : nlohmann::ordered_json(nullptr);
  j["episodes_mean"] = s.episodes_mean;
  j["regret_final_mean"] = s.regret_final_mean;
  j["regret_final_std"] = s.regret_final_std;
  j["seeds"] = s.seeds;
  j["rvi_certificate"] = s.rvi_certificate;
  j["errors"] = s.errors;
  j["wall_seconds"] = s.wall_seconds;
  return j.dump(2) + "\n";
}

std::vector<ScenarioSummary> run_grid(const std::vector<Scenario>& scenarios, const std::filesystem::path& out,
                                      unsigned workers) {
  std::vector<std::unique_ptr<Oracle>> oracles;
  for (const auto& sc : scenarios) {
    sc.validate();
    oracles.push_back(std::make_unique<Oracle>(sc.instance, sc.eps_oracle));
  }
  struct Task {
    std::size_t scenario;
    int replication;
  };
  std::vector<Task> tasks;
  std::vector<std::vector<CellResult>> cells(scenarios.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    cells[i].resize(static_cast<std::size_t>(scenarios[i].replications));
    for (int r = 0; r < scenarios[i].replications; ++r) tasks.push_back({i, r});
  }
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, tasks.size())));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      const auto& task = tasks[i];
      const auto& sc = scenarios[task.scenario];
      auto cell = run_cell(sc, *oracles[task.scenario], task.replication);
      if (cell.ok) {
        const auto dir = out / sc.name;
        std::filesystem::create_directories(dir);
        std::ofstream csv(dir / ("rep_" + std::to_string(task.replication) + ".csv"));
        write_csv(csv, cell.trace);
      }
      cells[task.scenario][static_cast<std::size_t>(task.replication)] = std::move(cell);
    }
  };
  std::vector<std::thread> threads;
  for (unsigned w = 1; w < workers; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  std::vector<ScenarioSummary> summaries;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    summaries.push_back(summarize(scenarios[i], *oracles[i], cells[i]));
    const auto dir = out / scenarios[i].name;
    std::filesystem::create_directories(dir);
    std::ofstream json(dir / "summary.json");
    json << summary_json(summaries.back());
  }
  return summaries;
}

}  // namespace restless
