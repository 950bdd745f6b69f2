#include "restless/bandit_env.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace restless {

namespace {

std::vector<double> cumulative_of(const std::vector<double>& probs) {
  std::vector<double> c(probs.size());
  std::partial_sum(probs.begin(), probs.end(), c.begin());
  return c;
}

std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  return labels;
}

}  // namespace

double ArmSpec::stationary_mean() const {
  const auto mu = stationary_distribution(transitions);
  return std::inner_product(mu.begin(), mu.end(), rewards.begin(), 0.0);
}

void ArmSpec::validate() const {
  const std::size_t n = transitions.size();
  if (rewards.size() != n) {
    std::ostringstream os;
    os << "arm '" << name << "': " << rewards.size() << " rewards for " << n << " states";
    throw ValidationError(os.str());
  }
  for (std::size_t s = 0; s < n; ++s)
    if (!(rewards[s] >= 0.0 && rewards[s] <= 1.0)) {
      std::ostringstream os;
      os << "arm '" << name << "': reward of state " << s << " = " << rewards[s] << " outside [0,1]";
      throw ValidationError(os.str());
    }
  if (!labels.empty() && labels.size() != n) throw ValidationError("arm '" + name + "': label count mismatch");
  if (!initial.empty()) {
    if (initial.size() != n) throw ValidationError("arm '" + name + "': initial distribution size mismatch");
    double total = 0.0;
    for (double v : initial) {
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("arm '" + name + "': initial entry outside [0,1]");
      total += v;
    }
    if (std::abs(total - 1.0) > kRowSumTolerance) throw ValidationError("arm '" + name + "': initial distribution does not sum to 1");
  }
  if (assumed_period < 1) throw ValidationError("arm '" + name + "': period must be >= 1");
}

ArmSpec iid_arm(double mean, std::string name) {
  return ArmSpec{std::move(name), {"0"}, TransitionMatrix(std::vector<std::vector<double>>{{1.0}}), {mean}, RewardNoise::bernoulli, {}, 1};
}

ArmSpec two_state_arm(double a, double b, std::vector<double> rewards, std::string name) {
  return ArmSpec{std::move(name), {"0", "1"}, TransitionMatrix({{1.0 - a, a}, {b, 1.0 - b}}), std::move(rewards),
                 RewardNoise::bernoulli, {}, 1};
}

ArmSpec cycle_arm(std::size_t m, std::vector<double> rewards, std::string name) {
  std::vector<std::vector<double>> rows(m, std::vector<double>(m, 0.0));
  for (std::size_t s = 0; s < m; ++s) rows[s][(s + 1) % m] = 1.0;
  const int assumed = static_cast<int>(m);
  return ArmSpec{std::move(name), default_labels(m), TransitionMatrix(rows), std::move(rewards),
                 RewardNoise::bernoulli, {}, assumed};
}

void BanditInstance::validate() const {
  if (arms.empty()) throw ValidationError("bandit instance needs at least one arm");
  for (const auto& arm : arms) arm.validate();
}

RestlessBandit::RestlessBandit(BanditInstance instance, std::uint64_t seed)
    : instance_(std::move(instance)), reward_rng_(derive_seed(seed, 0)) {
  instance_.validate();
  const std::size_t k = instance_.arms.size();
  cumulative_.resize(k);
  hidden_.resize(k);
  last_state_.assign(k, 0);
  last_pull_.assign(k, 0);
  for (std::size_t j = 0; j < k; ++j) {
    const auto& arm = instance_.arms[j];
    arm_rng_.emplace_back(derive_seed(seed, j + 1));
    for (std::size_t s = 0; s < arm.state_count(); ++s) cumulative_[j].push_back(cumulative_of(arm.transitions.row(s)));
    const auto init = arm.initial.empty() ? stationary_distribution(arm.transitions) : arm.initial;
    hidden_[j] = arm_rng_[j].sample_cumulative(cumulative_of(init));
  }
}

Observation RestlessBandit::step(std::size_t arm) {
  if (arm >= instance_.arms.size()) {
    std::ostringstream os;
    os << "arm index " << arm << " out of range (K = " << instance_.arms.size() << ")";
    throw std::out_of_range(os.str());
  }
  const auto& spec = instance_.arms[arm];
  Observation obs;
  obs.t = t_;
  obs.arm = arm;
  obs.state = hidden_[arm];
  const double mean = spec.rewards[obs.state];
  obs.reward = spec.noise == RewardNoise::bernoulli ? (reward_rng_.bernoulli(mean) ? 1.0 : 0.0) : mean;
  last_state_[arm] = obs.state;
  last_pull_[arm] = t_;
  for (std::size_t j = 0; j < hidden_.size(); ++j) hidden_[j] = arm_rng_[j].sample_cumulative(cumulative_[j][hidden_[j]]);
  ++t_;
  return obs;
}

bool RestlessBandit::all_arms_observed() const {
  for (auto t : last_pull_)
    if (t == 0) return false;
  return true;
}

ObservationSummary RestlessBandit::last_observation_summary() const {
  if (!all_arms_observed()) throw std::logic_error("last_observation_summary: some arm has never been pulled");
  ObservationSummary out;
  out.state = last_state_;
  out.gap.resize(last_pull_.size());
  for (std::size_t j = 0; j < last_pull_.size(); ++j) out.gap[j] = t_ - last_pull_[j];
  return out;
}

}  // namespace restless
