#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace restless {

/// Raised when user-supplied model data violates a structural invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative numerical procedure fails to terminate or a
/// linear system turns out singular.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kRowSumTolerance = 1e-9;

/// Row-stochastic square matrix. Rows are validated on construction: every
/// entry in [0,1] and every row summing to one within kRowSumTolerance (rows
/// inside the tolerance are renormalised, rows outside it are rejected).
class StochasticMatrix {
 public:
  explicit StochasticMatrix(const std::vector<std::vector<double>>& rows);
  explicit StochasticMatrix(Eigen::MatrixXd m);

  static StochasticMatrix identity(std::size_t n);

  std::size_t size() const { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t from, std::size_t to) const {
    return m_(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
  }
  const Eigen::MatrixXd& matrix() const { return m_; }
  std::vector<double> row(std::size_t s) const;

 private:
  struct Unchecked {};
  StochasticMatrix(Unchecked, Eigen::MatrixXd m) : m_(std::move(m)) {}
  Eigen::MatrixXd m_;
};

/// Transition matrix of an irreducible finite Markov chain (validated).
class TransitionMatrix {
 public:
  explicit TransitionMatrix(const std::vector<std::vector<double>>& rows);
  explicit TransitionMatrix(StochasticMatrix m);

  std::size_t size() const { return m_.size(); }
  double operator()(std::size_t from, std::size_t to) const { return m_(from, to); }
  const Eigen::MatrixXd& matrix() const { return m_.matrix(); }
  const StochasticMatrix& stochastic() const { return m_; }
  std::vector<double> row(std::size_t s) const { return m_.row(s); }

 private:
  StochasticMatrix m_;
};

/// True when the positive-entry graph of m is strongly connected.
bool is_irreducible(const Eigen::MatrixXd& m);

std::vector<double> stationary_distribution(const TransitionMatrix& p);

/// P^n. n = 0 yields the identity.
StochasticMatrix n_step_matrix(const TransitionMatrix& p, std::uint64_t n);

/// Lazily grown table of P^1, P^2, ... shared by model builders.
/// Not thread-safe; one cache per builder.
class MatrixPowers {
 public:
  explicit MatrixPowers(const TransitionMatrix& p);
  /// P^n, n >= 1.
  const Eigen::MatrixXd& power(std::uint64_t n);
  std::size_t size() const { return static_cast<std::size_t>(base_.rows()); }

 private:
  Eigen::MatrixXd base_;
  std::vector<Eigen::MatrixXd> powers_;
};

/// Greatest common divisor of the cycle lengths of the positive-transition
/// graph (computed from BFS levels).
int period(const TransitionMatrix& p);

/// d(t) = max_s || P^t(s,.) - mu ||_1. Requires an aperiodic chain.
double variation_distance_at(const TransitionMatrix& p, std::uint64_t t);

/// Least t with d(t) <= eps, by upward scan. Throws for periodic chains and
/// when max_steps is exceeded.
std::uint64_t mixing_time(const TransitionMatrix& p, double eps, std::uint64_t max_steps = 1'000'000);

/// Periodic generalisation of d(t): distance of P^t(s,.) to its limit along
/// the cyclic classes, m * mu restricted to the class reached after t steps.
/// Equals variation_distance_at for aperiodic chains.
double cyclic_variation_distance_at(const TransitionMatrix& p, std::uint64_t t);

/// Least t with cyclic_variation_distance_at(p, t) <= eps. For an m-periodic
/// chain, P^n and P^n' are within 2 eps whenever n, n' >= t and n = n' mod m.
std::uint64_t cyclic_mixing_time(const TransitionMatrix& p, double eps,
                                 std::uint64_t max_steps = 1'000'000);

/// hitting[s][target]: expected steps to reach target from s (0 on the
/// diagonal).
std::vector<std::vector<double>> hitting_times(const TransitionMatrix& p);

/// Expected first return time to each state.
std::vector<double> return_times(const TransitionMatrix& p);

/// max over ordered pairs s != s' of the expected hitting time.
double diameter(const TransitionMatrix& p);

struct ChainProfile {
  std::vector<double> stationary;
  int period = 1;
  double diameter = 0.0;
  /// T_mix(1/4); for periodic chains the cyclic mixing time.
  std::uint64_t mix_quarter = 1;
};

ChainProfile analyze_chain(const TransitionMatrix& p);

}  // namespace restless
