#include "restless/structured_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace restless {

namespace {

constexpr std::size_t kStructureCheckPairs = 10'000;

std::string describe(const MetaState& x) {
  std::ostringstream os;
  os << "(";
  for (std::size_t j = 0; j < x.state.size(); ++j) os << (j ? ", " : "") << x.state[j] << "/" << x.gap[j];
  os << ")";
  return os.str();
}

struct VectorHash {
  std::size_t operator()(const std::vector<std::uint32_t>& v) const {
    std::size_t h = v.size();
    for (auto x : v) h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

}  // namespace

GapScheme::GapScheme(int cap, int period)
    : cap_(std::max(cap, 1)), period_(std::max(period, 1)), floor_(std::max(cap_, 2)) {}

int GapScheme::saturate(std::int64_t n) const {
  if (n < 1) throw std::invalid_argument("gap must be >= 1");
  if (n < floor_) return static_cast<int>(n);
  return floor_ + static_cast<int>((n - floor_) % period_);
}

int GapScheme::law_exponent(int v) const {
  if (v < cap_) return v;
  return cap_ + (v - cap_) % period_;
}

MetaStateSpace::MetaStateSpace(std::vector<ArmLayout> arms, std::size_t size_limit) : arms_(std::move(arms)) {
  if (arms_.empty()) throw ValidationError("meta-state space needs at least one arm");
  const std::size_t k = arms_.size();
  std::size_t product = 1;
  radix_.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto& arm = arms_[j];
    if (arm.states == 0 || arm.cap < 1 || arm.period < 1) throw ValidationError("invalid arm layout");
    schemes_.emplace_back(arm.cap, arm.period);
    radix_[j] = arm.states * static_cast<std::size_t>(schemes_[j].value_count());
    if (product > size_limit / radix_[j] + 1) product = size_limit + 1;
    else product *= radix_[j];
    if (product > size_limit) {
      std::ostringstream os;
      os << "meta-state space too large: product over arms of |S_j| * counter range exceeds " << size_limit
         << " at arm " << j << " (";
      for (std::size_t i = 0; i <= j; ++i) os << (i ? " * " : "") << radix_[i];
      os << ")";
      throw ValidationError(os.str());
    }
  }

  // Enumerate in mixed radix order, keep valid states, then sort canonically.
  MetaState x{std::vector<std::uint32_t>(k, 0), std::vector<std::uint32_t>(k, 1)};
  std::vector<std::size_t> digit(k, 0);
  for (std::size_t idx = 0; idx < product; ++idx) {
    for (std::size_t j = 0; j < k; ++j) {
      const auto values = static_cast<std::size_t>(schemes_[j].value_count());
      x.state[j] = static_cast<std::uint32_t>(digit[j] / values);
      x.gap[j] = static_cast<std::uint32_t>(digit[j] % values + 1);
    }
    if (valid(x)) states_.push_back(x);
    for (std::size_t j = k; j-- > 0;) {
      if (++digit[j] < radix_[j]) break;
      digit[j] = 0;
    }
  }
  std::sort(states_.begin(), states_.end());
  table_.assign(product, -1);
  for (std::size_t i = 0; i < states_.size(); ++i) table_[table_index(states_[i])] = static_cast<std::int32_t>(i);

  // Colours and successors.
  const std::size_t n = states_.size();
  std::vector<ColorKey> keys(n * k);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t a = 0; a < k; ++a) {
      const auto v = static_cast<int>(states_[s].gap[a]);
      ColorKey key;
      key.arm = static_cast<std::uint32_t>(a);
      key.state = states_[s].state[a];
      key.gap_class = static_cast<std::uint32_t>(std::min(v, arms_[a].effective_color_cap()));
      key.residue = arms_[a].period > 1 ? static_cast<std::uint32_t>(v % arms_[a].period) : 0;
      keys[s * k + a] = key;
    }
  color_keys_ = keys;
  std::sort(color_keys_.begin(), color_keys_.end());
  color_keys_.erase(std::unique(color_keys_.begin(), color_keys_.end()), color_keys_.end());

  skeleton_.states = n;
  skeleton_.actions = k;
  skeleton_.color_count = color_keys_.size();
  skeleton_.landing_count.resize(color_keys_.size());
  for (std::size_t c = 0; c < color_keys_.size(); ++c)
    skeleton_.landing_count[c] = static_cast<std::uint32_t>(arms_[color_keys_[c].arm].states);
  skeleton_.color.resize(n * k);
  skeleton_.offset.resize(n * k);
  MetaState y;
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t a = 0; a < k; ++a) {
      const auto& key = keys[s * k + a];
      const auto c = std::lower_bound(color_keys_.begin(), color_keys_.end(), key) - color_keys_.begin();
      skeleton_.color[s * k + a] = static_cast<std::uint32_t>(c);
      skeleton_.offset[s * k + a] = static_cast<std::uint32_t>(skeleton_.successor.size());
      y = states_[s];
      for (std::size_t j = 0; j < k; ++j)
        if (j != a) y.gap[j] = static_cast<std::uint32_t>(schemes_[j].next(static_cast<int>(y.gap[j])));
      y.gap[a] = 1;
      for (std::size_t l = 0; l < arms_[a].states; ++l) {
        y.state[a] = static_cast<std::uint32_t>(l);
        const auto found = table_[table_index(y)];
        if (found < 0) throw std::logic_error("successor " + describe(y) + " is not a valid meta-state");
        skeleton_.successor.push_back(static_cast<std::uint32_t>(found));
      }
    }
}

std::size_t MetaStateSpace::table_index(const MetaState& x) const {
  std::size_t idx = 0;
  for (std::size_t j = 0; j < arms_.size(); ++j) {
    const auto values = static_cast<std::size_t>(schemes_[j].value_count());
    idx = idx * radix_[j] + x.state[j] * values + (x.gap[j] - 1);
  }
  return idx;
}

bool MetaStateSpace::valid(const MetaState& x) const {
  const std::size_t k = arms_.size();
  if (x.state.size() != k || x.gap.size() != k) return false;
  int fresh = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (x.state[j] >= arms_[j].states) return false;
    if (x.gap[j] < 1 || x.gap[j] > static_cast<std::uint32_t>(schemes_[j].value_count())) return false;
    if (x.gap[j] == 1) ++fresh;
  }
  if (fresh != 1) return false;
  for (std::size_t i = 0; i < k; ++i) {
    if (schemes_[i].saturated(static_cast<int>(x.gap[i]))) continue;
    for (std::size_t j = i + 1; j < k; ++j)
      if (!schemes_[j].saturated(static_cast<int>(x.gap[j])) && x.gap[i] == x.gap[j]) return false;
  }
  return true;
}

std::optional<std::size_t> MetaStateSpace::find(const MetaState& x) const {
  if (!valid(x)) return std::nullopt;
  const auto i = table_[table_index(x)];
  if (i < 0) return std::nullopt;
  return static_cast<std::size_t>(i);
}

std::size_t MetaStateSpace::encode(const ObservationSummary& summary) const {
  const std::size_t k = arms_.size();
  if (summary.state.size() != k || summary.gap.size() != k) throw std::invalid_argument("summary has wrong arm count");
  MetaState x{std::vector<std::uint32_t>(k), std::vector<std::uint32_t>(k)};
  for (std::size_t j = 0; j < k; ++j) {
    x.state[j] = static_cast<std::uint32_t>(summary.state[j]);
    x.gap[j] = static_cast<std::uint32_t>(schemes_[j].saturate(summary.gap[j]));
  }
  const auto found = find(x);
  if (!found) throw std::logic_error("observation " + describe(x) + " outside the enumerated meta-state space");
  return *found;
}

std::optional<std::size_t> MetaStateSpace::color_id(const ColorKey& key) const {
  const auto it = std::lower_bound(color_keys_.begin(), color_keys_.end(), key);
  if (it == color_keys_.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - color_keys_.begin());
}

int MetaStateSpace::law_exponent(std::size_t x, std::size_t a) const {
  return schemes_[a].law_exponent(static_cast<int>(states_[x].gap[a]));
}

std::size_t MetaStateSpace::support_bound() const {
  std::size_t b = 0;
  for (const auto& arm : arms_) b = std::max(b, arm.states);
  return b;
}

Translation::Translation(std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs) {
  std::vector<std::uint32_t> from, to;
  for (const auto& [a, b] : pairs) {
    from.push_back(a);
    to.push_back(b);
  }
  std::vector<std::uint32_t> sf = from, st = to;
  std::sort(sf.begin(), sf.end());
  std::sort(st.begin(), st.end());
  if (std::adjacent_find(sf.begin(), sf.end()) != sf.end() || std::adjacent_find(st.begin(), st.end()) != st.end())
    throw std::invalid_argument("translation pairs are not injective");
  // Images outside the source set are sent back onto sources outside the image set.
  std::vector<std::uint32_t> only_to, only_from;
  std::set_difference(st.begin(), st.end(), sf.begin(), sf.end(), std::back_inserter(only_to));
  std::set_difference(sf.begin(), sf.end(), st.begin(), st.end(), std::back_inserter(only_from));
  for (std::size_t i = 0; i < only_to.size(); ++i) pairs.emplace_back(only_to[i], only_from[i]);
  pairs.erase(std::remove_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.first == p.second; }),
              pairs.end());
  std::sort(pairs.begin(), pairs.end());
  map_ = std::move(pairs);
}

std::uint32_t Translation::operator()(std::uint32_t s) const {
  const auto it = std::lower_bound(map_.begin(), map_.end(), std::make_pair(s, std::uint32_t{0}));
  if (it != map_.end() && it->first == s) return it->second;
  return s;
}

StructuredMdp::StructuredMdp(Mdp mdp, ColoredSkeleton skeleton, std::vector<ColorKey> color_keys,
                             std::vector<double> landing_law, std::vector<MetaState> labels, double epsilon,
                             std::size_t support_bound)
    : mdp_(std::move(mdp)),
      skeleton_(std::move(skeleton)),
      color_keys_(std::move(color_keys)),
      landing_law_(std::move(landing_law)),
      labels_(std::move(labels)),
      epsilon_(epsilon),
      support_bound_(support_bound) {
  if (labels_.size() != mdp_.state_count() || skeleton_.states != mdp_.state_count())
    throw std::invalid_argument("StructuredMdp: inconsistent sizes");
  if (landing_law_.size() != skeleton_.successor.size())
    throw std::invalid_argument("StructuredMdp: landing law does not match successor table");
}

std::optional<std::size_t> StructuredMdp::find(const MetaState& x) const {
  // Labels are sorted for spaces built from enumerate_states; aggregation keeps
  // block order, so fall back to a scan when the binary search misses.
  const auto it = std::lower_bound(labels_.begin(), labels_.end(), x);
  if (it != labels_.end() && *it == x) return static_cast<std::size_t>(it - labels_.begin());
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == x) return i;
  return std::nullopt;
}

std::span<const double> StructuredMdp::landing_law(std::size_t x, std::size_t a) const {
  const std::size_t i = x * skeleton_.actions + a;
  return {landing_law_.data() + skeleton_.offset[i], skeleton_.landing_count[skeleton_.color[i]]};
}

std::pair<std::vector<Transition>, double> StructuredMdp::transition_and_reward(std::size_t x, std::size_t a) const {
  const auto row = mdp_.transitions(x, a);
  return {std::vector<Transition>(row.begin(), row.end()), mdp_.reward(x, a)};
}

Translation StructuredMdp::translate(std::size_t x, std::size_t a, std::size_t x2, std::size_t a2) const {
  if (skeleton_.color_of(x, a) != skeleton_.color_of(x2, a2))
    throw std::invalid_argument("translate: state-action pairs have different colours");
  const auto from = skeleton_.successors(x, a);
  const auto to = skeleton_.successors(x2, a2);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::size_t l = 0; l < from.size(); ++l) pairs.emplace_back(from[l], to[l]);
  return Translation(std::move(pairs));
}

StructureCheck StructuredMdp::check_structure() const {
  StructureCheck out;
  const std::size_t k = skeleton_.actions;
  std::vector<std::vector<std::size_t>> members(skeleton_.color_count);
  for (std::size_t x = 0; x < size(); ++x)
    for (std::size_t a = 0; a < k; ++a) members[skeleton_.color_of(x, a)].push_back(x * k + a);
  for (const auto& list : members) {
    // Distinct (landing law, reward) pairs within the colour.
    std::vector<std::pair<std::vector<double>, double>> laws;
    for (auto pair : list) {
      const std::size_t x = pair / k, a = pair % k;
      auto law = landing_law(x, a);
      std::pair<std::vector<double>, double> entry{{law.begin(), law.end()}, mdp_.reward(x, a)};
      if (std::find(laws.begin(), laws.end(), entry) == laws.end()) laws.push_back(std::move(entry));
    }
    out.pairs_checked += list.size();
    for (std::size_t i = 0; i < laws.size(); ++i)
      for (std::size_t j = i + 1; j < laws.size(); ++j) {
        double l1 = 0.0;
        for (std::size_t l = 0; l < laws[i].first.size(); ++l) l1 += std::abs(laws[i].first[l] - laws[j].first[l]);
        out.max_translated_l1 = std::max(out.max_translated_l1, l1);
        out.max_reward_gap = std::max(out.max_reward_gap, std::abs(laws[i].second - laws[j].second));
      }
  }
  return out;
}

MetaStateSpace enumerate_states(const std::vector<ArmLayout>& arms, std::size_t size_limit) {
  return MetaStateSpace(arms, size_limit);
}

StructuredMdp build_structured_mdp(const std::vector<ArmSpec>& arms, const MetaStateSpace& space, double epsilon) {
  const std::size_t k = arms.size();
  if (k != space.arm_count()) throw std::invalid_argument("arm count does not match meta-state space");
  for (std::size_t j = 0; j < k; ++j)
    if (arms[j].state_count() != space.arms()[j].states)
      throw std::invalid_argument("arm state count does not match meta-state space");
  std::vector<MatrixPowers> powers;
  for (const auto& arm : arms) powers.emplace_back(arm.transitions);

  const std::size_t n = space.size();
  const auto& skeleton = space.skeleton();
  Mdp mdp(n, k);
  std::vector<double> landing(skeleton.successor.size(), 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    const auto& label = space.state(x);
    for (std::size_t a = 0; a < k; ++a) {
      const auto& pn = powers[a].power(static_cast<std::uint64_t>(space.law_exponent(x, a)));
      const auto succ = space.successors(x, a);
      const std::size_t base = skeleton.offset[x * k + a];
      std::vector<Transition> row;
      double reward = 0.0;
      for (std::size_t l = 0; l < succ.size(); ++l) {
        const double p = pn(label.state[a], static_cast<Eigen::Index>(l));
        landing[base + l] = p;
        reward += p * arms[a].rewards[l];
        if (p > 0.0) row.push_back({succ[l], p});
      }
      mdp.set(x, a, std::clamp(reward, 0.0, 1.0), std::move(row));
    }
  }
  std::vector<ColorKey> keys(space.color_count());
  for (std::size_t c = 0; c < keys.size(); ++c) keys[c] = space.color_key(c);
  StructuredMdp out(std::move(mdp), skeleton, std::move(keys), std::move(landing), space.states(), epsilon,
                    space.support_bound());
  if (n * k <= kStructureCheckPairs) {
    // Same-coloured saturated pairs are both eps-close to the limit law, so
    // 2 eps is the guaranteed bound in general.
    const auto check = out.check_structure();
    const double bound = 2.0 * epsilon + 1e-9;
    if (check.max_reward_gap > bound || check.max_translated_l1 > bound) {
      std::ostringstream os;
      os << "colouring violates the structure bound: reward gap " << check.max_reward_gap << ", translated L1 "
         << check.max_translated_l1 << " for eps " << epsilon;
      throw NumericalError(os.str());
    }
  }
  return out;
}

std::vector<ArmLayout> mixing_layouts(const std::vector<ArmSpec>& arms, double epsilon, bool use_periods) {
  std::vector<ArmLayout> out;
  for (const auto& arm : arms) {
    ArmLayout layout;
    layout.states = arm.state_count();
    const int m = period(arm.transitions);
    if (m > 1 && use_periods) {
      layout.cap = static_cast<int>(cyclic_mixing_time(arm.transitions, epsilon));
      layout.period = m;
    } else {
      layout.cap = static_cast<int>(mixing_time(arm.transitions, epsilon));
    }
    out.push_back(layout);
  }
  return out;
}

StructuredMdp build_aggregated_mdp(const std::vector<ArmSpec>& arms, double epsilon, std::size_t size_limit) {
  const MetaStateSpace space(mixing_layouts(arms, epsilon), size_limit);
  return build_structured_mdp(arms, space, epsilon);
}

StructuredMdp build_t_step_mdp(const std::vector<ArmSpec>& arms, int horizon, double epsilon, std::size_t size_limit) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  auto layouts = epsilon > 0.0 ? mixing_layouts(arms, epsilon) : std::vector<ArmLayout>{};
  if (layouts.empty())
    for (const auto& arm : arms) {
      ArmLayout layout;
      layout.states = arm.state_count();
      layout.period = period(arm.transitions);
      layout.cap = horizon;
      layouts.push_back(layout);
    }
  for (auto& layout : layouts) {
    layout.color_cap = std::min(epsilon > 0.0 ? layout.cap : horizon, horizon);
    layout.cap = horizon;
  }
  const MetaStateSpace space(std::move(layouts), size_limit);
  return build_structured_mdp(arms, space, epsilon);
}

StructuredMdp aggregate(const StructuredMdp& in, AggregationRule rule) {
  const std::size_t n = in.size();
  const std::size_t k = in.skeleton().actions;
  const auto& sk = in.skeleton();

  // Coarsest partition compatible with the colouring and the landing-indexed
  // successor structure.
  std::vector<std::uint32_t> block(n, 0);
  std::size_t blocks = 0;
  {
    std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, VectorHash> ids;
    std::vector<std::uint32_t> sig(k);
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t a = 0; a < k; ++a) sig[a] = sk.color_of(x, a);
      block[x] = ids.try_emplace(sig, static_cast<std::uint32_t>(ids.size())).first->second;
    }
    blocks = ids.size();
  }
  for (;;) {
    std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, VectorHash> ids;
    std::vector<std::uint32_t> next(n);
    std::vector<std::uint32_t> sig;
    for (std::size_t x = 0; x < n; ++x) {
      sig.clear();
      sig.push_back(block[x]);
      for (std::size_t a = 0; a < k; ++a)
        for (auto y : sk.successors(x, a)) sig.push_back(block[y]);
      next[x] = ids.try_emplace(sig, static_cast<std::uint32_t>(ids.size())).first->second;
    }
    const bool stable = ids.size() == blocks;
    block = std::move(next);
    blocks = ids.size();
    if (stable) break;
  }

  // Renumber blocks by their representative so that labels come out sorted.
  std::vector<std::int64_t> rep(blocks, -1);
  std::vector<std::vector<std::size_t>> members(blocks);
  for (std::size_t x = 0; x < n; ++x) {
    members[block[x]].push_back(x);
    auto& r = rep[block[x]];
    if (r < 0 || in.label(x).gap < in.label(static_cast<std::size_t>(r)).gap) r = static_cast<std::int64_t>(x);
  }
  std::vector<std::uint32_t> order(blocks);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    return in.label(static_cast<std::size_t>(rep[a])) < in.label(static_cast<std::size_t>(rep[b]));
  });
  std::vector<std::uint32_t> rank(blocks);
  for (std::size_t i = 0; i < blocks; ++i) rank[order[i]] = static_cast<std::uint32_t>(i);

  ColoredSkeleton out_sk;
  out_sk.states = blocks;
  out_sk.actions = k;
  out_sk.color_count = sk.color_count;
  out_sk.landing_count = sk.landing_count;
  out_sk.color.resize(blocks * k);
  out_sk.offset.resize(blocks * k);
  std::vector<double> landing;
  std::vector<MetaState> labels(blocks);
  Mdp mdp(blocks, k);
  for (std::size_t i = 0; i < blocks; ++i) {
    const auto b = order[i];
    const auto r = static_cast<std::size_t>(rep[b]);
    labels[i] = in.label(r);
    for (std::size_t a = 0; a < k; ++a) {
      out_sk.color[i * k + a] = sk.color_of(r, a);
      out_sk.offset[i * k + a] = static_cast<std::uint32_t>(out_sk.successor.size());
      const auto succ = sk.successors(r, a);
      std::vector<double> law(succ.size(), 0.0);
      double reward = 0.0;
      if (rule == AggregationRule::average) {
        for (auto x : members[b]) {
          const auto lx = in.landing_law(x, a);
          for (std::size_t l = 0; l < law.size(); ++l) law[l] += lx[l];
          reward += in.mdp().reward(x, a);
        }
        const double w = 1.0 / static_cast<double>(members[b].size());
        for (auto& v : law) v *= w;
        reward *= w;
      } else {
        const auto lr = in.landing_law(r, a);
        law.assign(lr.begin(), lr.end());
        reward = in.mdp().reward(r, a);
      }
      std::vector<Transition> row;
      for (std::size_t l = 0; l < succ.size(); ++l) {
        const auto target = rank[block[succ[l]]];
        out_sk.successor.push_back(target);
        landing.push_back(law[l]);
        if (law[l] <= 0.0) continue;
        auto it = std::find_if(row.begin(), row.end(), [&](const Transition& t) { return t.to == target; });
        if (it == row.end()) row.push_back({target, law[l]});
        else it->prob += law[l];
      }
      mdp.set(i, a, reward, std::move(row));
    }
  }
  std::vector<ColorKey> keys(sk.color_count);
  for (std::size_t c = 0; c < keys.size(); ++c) keys[c] = in.color_key(c);
  return StructuredMdp(std::move(mdp), std::move(out_sk), std::move(keys), std::move(landing), std::move(labels),
                       in.epsilon(), in.support_bound());
}

}  // namespace restless
