#include "restless/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Sparse>

#include "restless/chain_analysis.hpp"

namespace restless {

namespace {

template <class Op>
PlanResult iterate(std::size_t n, const IterationOptions& options, const char* what, Op&& op) {
  if (n == 0) throw std::invalid_argument(std::string(what) + ": empty state space");
  const std::size_t ref = options.reference_state < n ? options.reference_state : 0;
  std::vector<double> u(n, 0.0), tu(n, 0.0);
  if (options.warm_start && options.warm_start->size() == n) u = *options.warm_start;
  Policy policy(n, 0);
  PlanResult out;
  double best_span = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  double span = best_span;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    op(u, tu, policy);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t s = 0; s < n; ++s) {
      const double d = tu[s] - u[s];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    span = hi - lo;
    if (options.record_history) out.span_history.push_back(span);
    if (span < options.tolerance) {
      out.gain = 0.5 * (hi + lo);
      out.gain_tolerance = 0.5 * span;
      out.bias.resize(n);
      for (std::size_t s = 0; s < n; ++s) out.bias[s] = tu[s] - tu[ref];
      out.policy = std::move(policy);
      out.iterations = it;
      return out;
    }
    if (span < best_span) {
      best_span = span;
      since_best = 0;
    } else if (++since_best >= options.damping_window) {
      out.damped = true;
    }
    if (out.damped)
      for (std::size_t s = 0; s < n; ++s) u[s] += 0.5 * (tu[s] - u[s]);
    else
      u.swap(tu);
    const double shift = u[ref];
    for (auto& v : u) v -= shift;
  }
  std::ostringstream os;
  os << what << ": no convergence after " << options.max_iterations << " sweeps (span " << span << ", best "
     << best_span << ", tolerance " << options.tolerance << ")";
  throw NumericalError(os.str());
}

// Small fixed-size scratch for the optimistic inner maximisation.
struct Candidate {
  double value;
  double prob;
  std::uint32_t index;
};

double optimistic_value(Candidate* c, std::size_t m, double radius) {
  std::sort(c, c + m, [](const Candidate& a, const Candidate& b) {
    return a.value > b.value || (a.value == b.value && a.index < b.index);
  });
  c[0].prob = std::min(1.0, c[0].prob + 0.5 * radius);
  double excess = -1.0;
  for (std::size_t i = 0; i < m; ++i) excess += c[i].prob;
  for (std::size_t i = m; i-- > 1 && excess > 0.0;) {
    const double take = std::min(c[i].prob, excess);
    c[i].prob -= take;
    excess -= take;
  }
  double v = 0.0;
  for (std::size_t i = 0; i < m; ++i) v += c[i].prob * c[i].value;
  return v;
}

// Iterative Tarjan over the policy-induced graph.
std::vector<std::uint32_t> strongly_connected(const Mdp& mdp, const Policy& policy, std::size_t& count) {
  const std::size_t n = mdp.state_count();
  constexpr std::uint32_t unset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> index(n, unset), low(n, 0), comp(n, unset), stack;
  std::vector<bool> on_stack(n, false);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> call;  // (node, next edge)
  std::uint32_t counter = 0;
  count = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unset) continue;
    call.emplace_back(static_cast<std::uint32_t>(root), 0);
    index[root] = low[root] = counter++;
    stack.push_back(static_cast<std::uint32_t>(root));
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, e] = call.back();
      const auto row = mdp.transitions(v, policy[v]);
      if (e < row.size()) {
        const auto w = row[e++].to;
        if (row[e - 1].prob <= 0.0) continue;
        if (index[w] == unset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const auto node = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[node]);
      if (low[node] == index[node]) {
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = static_cast<std::uint32_t>(count);
        } while (w != node);
        ++count;
      }
    }
  }
  return comp;
}

struct ClassInfo {
  std::vector<std::uint32_t> comp;
  std::vector<bool> closed;
  std::vector<double> class_gain;
};

ClassInfo recurrent_classes(const Mdp& mdp, const Policy& policy) {
  const std::size_t n = mdp.state_count();
  ClassInfo info;
  std::size_t count = 0;
  info.comp = strongly_connected(mdp, policy, count);
  info.closed.assign(count, true);
  info.class_gain.assign(count, 0.0);
  for (std::size_t s = 0; s < n; ++s)
    for (const auto& tr : mdp.transitions(s, policy[s]))
      if (tr.prob > 0.0 && info.comp[tr.to] != info.comp[s]) info.closed[info.comp[s]] = false;

  std::vector<std::vector<std::uint32_t>> members(count);
  for (std::size_t s = 0; s < n; ++s)
    if (info.closed[info.comp[s]]) members[info.comp[s]].push_back(static_cast<std::uint32_t>(s));
  std::vector<std::int64_t> local(n, -1);
  for (std::size_t c = 0; c < count; ++c) {
    if (!info.closed[c]) continue;
    const auto& m = members[c];
    const auto k = static_cast<Eigen::Index>(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) local[m[i]] = static_cast<std::int64_t>(i);
    double gain = 0.0;
    if (k == 1) {
      gain = mdp.reward(m[0], policy[m[0]]);
    } else {
      // (P^T - I) mu = 0 with the last equation replaced by sum(mu) = 1.
      std::vector<Eigen::Triplet<double>> triplets;
      for (std::size_t i = 0; i < m.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        if (col != k - 1) triplets.emplace_back(col, col, -1.0);
        for (const auto& tr : mdp.transitions(m[i], policy[m[i]])) {
          const auto row = static_cast<Eigen::Index>(local[tr.to]);
          if (row != k - 1) triplets.emplace_back(row, col, tr.prob);
        }
        triplets.emplace_back(k - 1, col, 1.0);
      }
      Eigen::SparseMatrix<double> a(k, k);
      a.setFromTriplets(triplets.begin(), triplets.end());
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
      lu.compute(a);
      if (lu.info() != Eigen::Success) throw NumericalError("policy evaluation: singular stationary system");
      Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
      b(k - 1) = 1.0;
      const Eigen::VectorXd mu = lu.solve(b);
      for (std::size_t i = 0; i < m.size(); ++i) gain += mu(static_cast<Eigen::Index>(i)) * mdp.reward(m[i], policy[m[i]]);
    }
    info.class_gain[c] = gain;
  }
  return info;
}

}  // namespace

PlanResult relative_value_iteration(const Mdp& mdp, const IterationOptions& options) {
  const std::size_t k = mdp.action_count();
  return iterate(mdp.state_count(), options, "relative_value_iteration",
                 [&](const std::vector<double>& u, std::vector<double>& tu, Policy& policy) {
                   for (std::size_t s = 0; s < u.size(); ++s) {
                     double best = -std::numeric_limits<double>::infinity();
                     std::uint32_t arg = 0;
                     for (std::size_t a = 0; a < k; ++a) {
                       double q = mdp.reward(s, a);
                       for (const auto& tr : mdp.transitions(s, a)) q += tr.prob * u[tr.to];
                       if (q > best + 1e-12) {
                         best = q;
                         arg = static_cast<std::uint32_t>(a);
                       }
                     }
                     tu[s] = best;
                     policy[s] = arg;
                   }
                 });
}

PlausibleSet plausible_set_from(const StructuredMdp& mdp) {
  const auto& sk = mdp.skeleton();
  PlausibleSet out;
  const std::size_t colors = sk.color_count;
  out.reward_center.assign(colors, 0.0);
  out.reward_radius.assign(colors, 0.0);
  out.transition_radius.assign(colors, 0.0);
  out.center_offset.assign(colors, 0);
  std::vector<bool> seen(colors, false);
  std::uint32_t offset = 0;
  for (std::size_t c = 0; c < colors; ++c) {
    out.center_offset[c] = offset;
    offset += sk.landing_count[c];
  }
  out.transition_center.assign(offset, 0.0);
  for (std::size_t x = 0; x < mdp.size(); ++x)
    for (std::size_t a = 0; a < sk.actions; ++a) {
      const auto c = sk.color_of(x, a);
      if (seen[c]) continue;
      seen[c] = true;
      out.reward_center[c] = mdp.mdp().reward(x, a);
      const auto law = mdp.landing_law(x, a);
      std::copy(law.begin(), law.end(), out.transition_center.begin() + out.center_offset[c]);
    }
  return out;
}

std::vector<double> optimistic_transition(std::span<const double> center, double radius,
                                          std::span<const double> values) {
  if (center.size() != values.size() || center.empty())
    throw std::invalid_argument("optimistic_transition: size mismatch");
  std::vector<Candidate> c(center.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = {values[i], center[i], static_cast<std::uint32_t>(i)};
  optimistic_value(c.data(), c.size(), radius);
  std::vector<double> out(center.size());
  for (const auto& e : c) out[e.index] = e.prob;
  return out;
}

PlanResult extended_value_iteration(const ColoredSkeleton& sk, const PlausibleSet& plausible,
                                    const IterationOptions& options, BallSupport support) {
  const std::size_t k = sk.actions;
  std::size_t max_landing = 0;
  for (auto l : sk.landing_count) max_landing = std::max<std::size_t>(max_landing, l);
  std::vector<Candidate> scratch(max_landing + 1);
  const bool unrestricted = support == BallSupport::unrestricted;
  return iterate(sk.states, options, "extended_value_iteration",
                 [&](const std::vector<double>& u, std::vector<double>& tu, Policy& policy) {
                   const auto global_best =
                       static_cast<std::uint32_t>(std::max_element(u.begin(), u.end()) - u.begin());
                   for (std::size_t s = 0; s < sk.states; ++s) {
                     double best = -std::numeric_limits<double>::infinity();
                     std::uint32_t arg = 0;
                     for (std::size_t a = 0; a < k; ++a) {
                       const auto c = sk.color_of(s, a);
                       const auto succ = sk.successors(s, a);
                       const auto center = plausible.center(c, succ.size());
                       const double radius = plausible.transition_radius[c];
                       double q = std::min(1.0, plausible.reward_center[c] + plausible.reward_radius[c]);
                       if (radius <= 0.0) {
                         for (std::size_t l = 0; l < succ.size(); ++l) q += center[l] * u[succ[l]];
                       } else {
                         std::size_t m = 0;
                         bool has_best = false;
                         for (std::size_t l = 0; l < succ.size(); ++l) {
                           scratch[m++] = {u[succ[l]], center[l], static_cast<std::uint32_t>(l)};
                           has_best = has_best || succ[l] == global_best;
                         }
                         if (unrestricted && !has_best)
                           scratch[m++] = {u[global_best], 0.0, static_cast<std::uint32_t>(succ.size())};
                         q += optimistic_value(scratch.data(), m, radius);
                       }
                       if (q > best + 1e-12) {
                         best = q;
                         arg = static_cast<std::uint32_t>(a);
                       }
                     }
                     tu[s] = best;
                     policy[s] = arg;
                   }
                 });
}

double mdp_diameter(const Mdp& mdp, double tolerance, std::size_t max_iterations) {
  const std::size_t n = mdp.state_count(), k = mdp.action_count();
  double diameter = 0.0;
  std::vector<double> h(n);
  for (std::size_t target = 0; target < n; ++target) {
    std::fill(h.begin(), h.end(), 0.0);
    bool converged = false;
    for (std::size_t it = 0; it < max_iterations && !converged; ++it) {
      double change = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        if (s == target) continue;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < k; ++a) {
          double q = 1.0;
          for (const auto& tr : mdp.transitions(s, a))
            if (tr.to != target) q += tr.prob * h[tr.to];
          best = std::min(best, q);
        }
        change = std::max(change, std::abs(best - h[s]) / std::max(1.0, best));
        h[s] = best;
      }
      converged = change < tolerance;
    }
    if (!converged) {
      std::ostringstream os;
      os << "mdp_diameter: hitting times of state " << target << " did not converge in " << max_iterations
         << " sweeps";
      throw NumericalError(os.str());
    }
    diameter = std::max(diameter, *std::max_element(h.begin(), h.end()));
  }
  return diameter;
}

std::vector<double> policy_gains(const Mdp& mdp, const Policy& policy) {
  const std::size_t n = mdp.state_count();
  if (policy.size() != n) throw std::invalid_argument("policy size does not match MDP");
  const auto info = recurrent_classes(mdp, policy);
  std::vector<double> gain(n, 0.0);
  std::vector<std::int64_t> local(n, -1);
  std::vector<std::uint32_t> transient;
  for (std::size_t s = 0; s < n; ++s) {
    if (info.closed[info.comp[s]]) {
      gain[s] = info.class_gain[info.comp[s]];
    } else {
      local[s] = static_cast<std::int64_t>(transient.size());
      transient.push_back(static_cast<std::uint32_t>(s));
    }
  }
  if (transient.empty()) return gain;
  // (I - P_TT) g_T = P_TR g_R
  const auto m = static_cast<Eigen::Index>(transient.size());
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto s = transient[static_cast<std::size_t>(i)];
    triplets.emplace_back(i, i, 1.0);
    for (const auto& tr : mdp.transitions(s, policy[s])) {
      if (local[tr.to] >= 0) triplets.emplace_back(i, local[tr.to], -tr.prob);
      else b(i) += tr.prob * gain[tr.to];
    }
  }
  Eigen::SparseMatrix<double> a(m, m);
  a.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw NumericalError("policy evaluation: singular absorption system");
  const Eigen::VectorXd g = lu.solve(b);
  for (Eigen::Index i = 0; i < m; ++i) gain[transient[static_cast<std::size_t>(i)]] = g(i);
  return gain;
}

double policy_average_reward(const Mdp& mdp, const Policy& policy, std::size_t start) {
  if (start >= mdp.state_count()) throw std::out_of_range("policy_average_reward: start state out of range");
  const auto reach = reachable_states(mdp, start, policy);
  if (reach.size() == mdp.state_count()) return policy_gains(mdp, policy)[start];
  // The set is closed only under the policy's actions: evaluate the induced chain.
  std::vector<std::int64_t> index(mdp.state_count(), -1);
  for (std::size_t i = 0; i < reach.size(); ++i) index[reach[i]] = static_cast<std::int64_t>(i);
  Mdp chain(reach.size(), 1);
  for (std::size_t i = 0; i < reach.size(); ++i) {
    std::vector<Transition> row;
    for (const auto& tr : mdp.transitions(reach[i], policy[reach[i]]))
      if (tr.prob > 0.0) row.push_back({static_cast<std::uint32_t>(index[tr.to]), tr.prob});
    chain.set(i, 0, mdp.reward(reach[i], policy[reach[i]]), std::move(row));
  }
  const auto pos = std::lower_bound(reach.begin(), reach.end(), start) - reach.begin();
  return policy_gains(chain, Policy(reach.size(), 0))[static_cast<std::size_t>(pos)];
}

PlanResult brute_force_policy_search(const Mdp& mdp, std::size_t budget, const std::vector<int>& fixed) {
  const std::size_t n = mdp.state_count(), k = mdp.action_count();
  std::vector<std::size_t> choices(n, k);
  for (std::size_t s = 0; s < fixed.size() && s < n; ++s)
    if (fixed[s] >= 0) choices[s] = 1;
  double total = 1.0;
  for (auto c : choices) total *= static_cast<double>(c);
  if (total > static_cast<double>(budget)) {
    std::ostringstream os;
    os << "brute_force_policy_search: " << total << " policies exceed the budget of " << budget;
    throw std::length_error(os.str());
  }
  Policy policy(n, 0);
  for (std::size_t s = 0; s < fixed.size() && s < n; ++s)
    if (fixed[s] >= 0) policy[s] = static_cast<std::uint32_t>(fixed[s]);
  PlanResult best;
  best.gain = -1.0;
  std::size_t evaluated = 0;
  for (;;) {
    const auto info = recurrent_classes(mdp, policy);
    ++evaluated;
    for (std::size_t c = 0; c < info.closed.size(); ++c)
      if (info.closed[c] && info.class_gain[c] > best.gain + 1e-12) {
        best.gain = info.class_gain[c];
        best.policy = policy;
      }
    std::size_t s = 0;
    for (; s < n; ++s) {
      if (choices[s] == 1) continue;
      if (++policy[s] < k) break;
      policy[s] = 0;
    }
    if (s == n) break;
  }
  best.iterations = evaluated;
  return best;
}

std::vector<std::uint32_t> reachable_states(const Mdp& mdp, std::size_t start, const Policy& policy) {
  const std::size_t n = mdp.state_count();
  std::vector<bool> seen(n, false);
  std::vector<std::uint32_t> queue{static_cast<std::uint32_t>(start)};
  seen[start] = true;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto s = queue[head];
    const std::size_t a0 = policy.empty() ? 0 : policy[s];
    const std::size_t a1 = policy.empty() ? mdp.action_count() : a0 + 1;
    for (std::size_t a = a0; a < a1; ++a)
      for (const auto& tr : mdp.transitions(s, a))
        if (tr.prob > 0.0 && !seen[tr.to]) {
          seen[tr.to] = true;
          queue.push_back(tr.to);
        }
  }
  std::sort(queue.begin(), queue.end());
  return queue;
}

Mdp restrict_mdp(const Mdp& mdp, const std::vector<std::uint32_t>& states) {
  std::vector<std::int64_t> local(mdp.state_count(), -1);
  for (std::size_t i = 0; i < states.size(); ++i) local[states[i]] = static_cast<std::int64_t>(i);
  Mdp out(states.size(), mdp.action_count());
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t a = 0; a < mdp.action_count(); ++a) {
      std::vector<Transition> row;
      for (const auto& tr : mdp.transitions(states[i], a)) {
        if (tr.prob <= 0.0) continue;
        if (local[tr.to] < 0) throw std::invalid_argument("restrict_mdp: state set is not closed");
        row.push_back({static_cast<std::uint32_t>(local[tr.to]), tr.prob});
      }
      out.set(i, a, mdp.reward(states[i], a), std::move(row));
    }
  return out;
}

}  // namespace restless
