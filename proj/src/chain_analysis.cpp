#include "restless/chain_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace restless {

namespace {

Eigen::MatrixXd validated_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  if (n == 0) throw ValidationError("transition matrix has no rows");
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      std::ostringstream os;
      os << "row " << i << " has " << rows[i].size() << " entries, expected " << n;
      throw ValidationError(os.str());
    }
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void check_and_normalise(Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ValidationError("transition matrix must be square and non-empty");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        std::ostringstream os;
        os << "row " << i << " entry " << j << " = " << v << " is not a probability";
        throw ValidationError(os.str());
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "row " << i << " sums to " << sum << ", not 1";
      throw ValidationError(os.str());
    }
    m.row(i) /= sum;
  }
}

std::vector<std::vector<std::size_t>> positive_graph(const Eigen::MatrixXd& m, bool reversed) {
  const auto n = static_cast<std::size_t>(m.rows());
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) {
        if (reversed)
          adj[j].push_back(i);
        else
          adj[i].push_back(j);
      }
  return adj;
}

std::vector<long> bfs_levels(const std::vector<std::vector<std::size_t>>& adj) {
  std::vector<long> level(adj.size(), -1);
  std::queue<std::size_t> q;
  level[0] = 0;
  q.push(0);
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop();
    for (std::size_t v : adj[u])
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      }
  }
  return level;
}

struct CyclicStructure {
  int period = 1;
  std::vector<int> cls;
};

CyclicStructure cyclic_structure(const Eigen::MatrixXd& m) {
  const auto adj = positive_graph(m, false);
  const auto level = bfs_levels(adj);
  long g = 0;
  for (std::size_t u = 0; u < adj.size(); ++u)
    for (std::size_t v : adj[u]) g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
  CyclicStructure out;
  out.period = g == 0 ? 1 : static_cast<int>(g);
  out.cls.resize(adj.size());
  for (std::size_t s = 0; s < adj.size(); ++s) out.cls[s] = static_cast<int>(level[s] % out.period);
  return out;
}

std::vector<double> stationary_power_iteration(const Eigen::MatrixXd& p) {
  const Eigen::Index n = p.rows();
  // lazy chain (P + I)/2 has the same stationary law and is aperiodic
  Eigen::RowVectorXd mu = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < 10'000'000; ++it) {
    Eigen::RowVectorXd next = 0.5 * (mu * p + mu);
    const double diff = (next - mu).lpNorm<1>();
    mu = next / next.sum();
    if (diff < 1e-15) break;
  }
  return {mu.data(), mu.data() + n};
}

// Upward scan of t -> distance(P^t) with the matrix power carried along.
template <typename Distance>
std::uint64_t scan_mixing(const TransitionMatrix& p, double eps, std::uint64_t max_steps, Distance distance) {
  if (!(eps > 0.0)) throw std::invalid_argument("mixing_time: eps must be positive");
  Eigen::MatrixXd power = p.matrix();
  double d = 0.0;
  for (std::uint64_t t = 1; t <= max_steps; ++t) {
    d = distance(power, t);
    if (d <= eps) return t;
    power = power * p.matrix();
  }
  std::ostringstream os;
  os << "mixing time scan exceeded " << max_steps << " steps; last d(t) = " << d;
  throw NumericalError(os.str());
}

double distance_to_stationary(const Eigen::MatrixXd& power, const std::vector<double>& mu) {
  double worst = 0.0;
  for (Eigen::Index s = 0; s < power.rows(); ++s) {
    double l1 = 0.0;
    for (Eigen::Index u = 0; u < power.cols(); ++u) l1 += std::abs(power(s, u) - mu[static_cast<std::size_t>(u)]);
    worst = std::max(worst, l1);
  }
  return worst;
}

double distance_to_cyclic_limit(const Eigen::MatrixXd& power, std::uint64_t t, const std::vector<double>& mu,
                                const CyclicStructure& cs) {
  double worst = 0.0;
  const auto m = static_cast<std::uint64_t>(cs.period);
  for (Eigen::Index s = 0; s < power.rows(); ++s) {
    const auto target = static_cast<int>((static_cast<std::uint64_t>(cs.cls[static_cast<std::size_t>(s)]) + t) % m);
    double l1 = 0.0;
    for (Eigen::Index u = 0; u < power.cols(); ++u) {
      const auto uu = static_cast<std::size_t>(u);
      const double limit = cs.cls[uu] == target ? static_cast<double>(m) * mu[uu] : 0.0;
      l1 += std::abs(power(s, u) - limit);
    }
    worst = std::max(worst, l1);
  }
  return worst;
}

void require_aperiodic(const TransitionMatrix& p, const char* what) {
  const int m = period(p);
  if (m != 1) {
    std::ostringstream os;
    os << what << ": chain has period " << m << ", d(t) does not converge";
    throw std::domain_error(os.str());
  }
}

}  // namespace

StochasticMatrix::StochasticMatrix(const std::vector<std::vector<double>>& rows) : m_(validated_rows(rows)) {
  check_and_normalise(m_);
}

StochasticMatrix::StochasticMatrix(Eigen::MatrixXd m) : m_(std::move(m)) { check_and_normalise(m_); }

StochasticMatrix StochasticMatrix::identity(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return StochasticMatrix(Unchecked{}, Eigen::MatrixXd::Identity(k, k));
}

std::vector<double> StochasticMatrix::row(std::size_t s) const {
  std::vector<double> out(size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = (*this)(s, t);
  return out;
}

TransitionMatrix::TransitionMatrix(const std::vector<std::vector<double>>& rows)
    : TransitionMatrix(StochasticMatrix(rows)) {}

TransitionMatrix::TransitionMatrix(StochasticMatrix m) : m_(std::move(m)) {
  if (!is_irreducible(m_.matrix())) throw ValidationError("transition matrix is reducible (not strongly connected)");
}

bool is_irreducible(const Eigen::MatrixXd& m) {
  for (bool reversed : {false, true}) {
    const auto level = bfs_levels(positive_graph(m, reversed));
    if (std::any_of(level.begin(), level.end(), [](long l) { return l < 0; })) return false;
  }
  return true;
}

std::vector<double> stationary_distribution(const TransitionMatrix& p) {
  const Eigen::Index n = static_cast<Eigen::Index>(p.size());
  if (n == 1) return {1.0};
  if (n == 2) {
    const double a = p(0, 1), b = p(1, 0);
    return {b / (a + b), a / (a + b)};
  }
  if (n > 1500) return stationary_power_iteration(p.matrix());
  // (P^T - I) mu = 0 with the last equation replaced by sum(mu) = 1
  Eigen::MatrixXd a = p.matrix().transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  const Eigen::VectorXd mu = a.fullPivLu().solve(b);
  if (!mu.allFinite()) throw NumericalError("stationary_distribution: singular system");
  std::vector<double> out(mu.data(), mu.data() + n);
  for (double& v : out) v = std::max(v, 0.0);
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& v : out) v /= total;
  return out;
}

StochasticMatrix n_step_matrix(const TransitionMatrix& p, std::uint64_t n) {
  if (n == 0) return StochasticMatrix::identity(p.size());
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(p.matrix().rows(), p.matrix().cols());
  Eigen::MatrixXd base = p.matrix();
  while (n > 0) {
    if (n & 1U) result = result * base;
    n >>= 1U;
    if (n > 0) base = base * base;
  }
  return StochasticMatrix(std::move(result));
}

MatrixPowers::MatrixPowers(const TransitionMatrix& p) : base_(p.matrix()) { powers_.push_back(base_); }

const Eigen::MatrixXd& MatrixPowers::power(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("MatrixPowers::power: n must be >= 1");
  while (powers_.size() < n) powers_.push_back(powers_.back() * base_);
  return powers_[n - 1];
}

int period(const TransitionMatrix& p) { return cyclic_structure(p.matrix()).period; }

double variation_distance_at(const TransitionMatrix& p, std::uint64_t t) {
  require_aperiodic(p, "variation_distance_at");
  const auto mu = stationary_distribution(p);
  return distance_to_stationary(n_step_matrix(p, t).matrix(), mu);
}

std::uint64_t mixing_time(const TransitionMatrix& p, double eps, std::uint64_t max_steps) {
  require_aperiodic(p, "mixing_time");
  const auto mu = stationary_distribution(p);
  return scan_mixing(p, eps, max_steps,
                     [&](const Eigen::MatrixXd& power, std::uint64_t) { return distance_to_stationary(power, mu); });
}

double cyclic_variation_distance_at(const TransitionMatrix& p, std::uint64_t t) {
  const auto mu = stationary_distribution(p);
  const auto cs = cyclic_structure(p.matrix());
  return distance_to_cyclic_limit(n_step_matrix(p, t).matrix(), t, mu, cs);
}

std::uint64_t cyclic_mixing_time(const TransitionMatrix& p, double eps, std::uint64_t max_steps) {
  const auto mu = stationary_distribution(p);
  const auto cs = cyclic_structure(p.matrix());
  return scan_mixing(p, eps, max_steps, [&](const Eigen::MatrixXd& power, std::uint64_t t) {
    return distance_to_cyclic_limit(power, t, mu, cs);
  });
}

std::vector<std::vector<double>> hitting_times(const TransitionMatrix& p) {
  const auto n = static_cast<Eigen::Index>(p.size());
  std::vector<std::vector<double>> h(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  if (n == 1) return h;
  for (Eigen::Index target = 0; target < n; ++target) {
    // h(s) = 1 + sum_{u != target} P[s][u] h(u) over the n-1 non-target states
    Eigen::MatrixXd a(n - 1, n - 1);
    std::vector<Eigen::Index> idx;
    for (Eigen::Index s = 0; s < n; ++s)
      if (s != target) idx.push_back(s);
    for (Eigen::Index i = 0; i < n - 1; ++i)
      for (Eigen::Index j = 0; j < n - 1; ++j)
        a(i, j) = (i == j ? 1.0 : 0.0) - p.matrix()(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    const Eigen::VectorXd sol = a.partialPivLu().solve(Eigen::VectorXd::Ones(n - 1));
    if (!sol.allFinite() || (a * sol - Eigen::VectorXd::Ones(n - 1)).lpNorm<Eigen::Infinity>() > 1e-6 * (1.0 + sol.lpNorm<Eigen::Infinity>()))
      throw NumericalError("hitting_times: singular hitting-time system");
    for (Eigen::Index i = 0; i < n - 1; ++i)
      h[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])][static_cast<std::size_t>(target)] = sol(i);
  }
  return h;
}

std::vector<double> return_times(const TransitionMatrix& p) {
  const auto h = hitting_times(p);
  const std::size_t n = p.size();
  std::vector<double> tau(n, 1.0);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t u = 0; u < n; ++u) tau[s] += p(s, u) * h[u][s];
  return tau;
}

double diameter(const TransitionMatrix& p) {
  double d = 0.0;
  for (const auto& row : hitting_times(p))
    for (double v : row) d = std::max(d, v);
  return d;
}

ChainProfile analyze_chain(const TransitionMatrix& p) {
  ChainProfile out;
  out.stationary = stationary_distribution(p);
  out.period = period(p);
  out.diameter = diameter(p);
  out.mix_quarter = out.period == 1 ? mixing_time(p, 0.25) : cyclic_mixing_time(p, 0.25);
  return out;
}

}  // namespace restless
