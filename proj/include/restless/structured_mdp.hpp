#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "restless/bandit_env.hpp"
#include "restless/mdp.hpp"

namespace restless {

/// Per-arm layout of the gap counter n_j.
///
/// Stored counter values run over 1..floor+period-1 with floor = max(cap, 2):
/// values below floor are exact gaps, values at or above floor form a ring of
/// `period` saturated values that keeps n mod period. The fresh arm (just
/// pulled) always stores 1, so with K >= 2 every other arm stores at least 2.
struct ArmLayout {
  std::size_t states = 1;
  /// Saturation cap of the stored counter (T_mix(eps) when aggregated, T for
  /// the exact T-step representation).
  int cap = 1;
  /// gap_class saturation used by the colouring; defaults to `cap`.
  int color_cap = 0;
  /// Residue modulus (Remark-2 colouring); 1 disables residues.
  int period = 1;

  int effective_color_cap() const { return color_cap > 0 ? color_cap : cap; }
};

/// Counter arithmetic for one arm.
class GapScheme {
 public:
  GapScheme() = default;
  GapScheme(int cap, int period);

  int floor() const { return floor_; }
  int period() const { return period_; }
  int cap() const { return cap_; }
  int value_count() const { return floor_ + period_ - 1; }
  bool saturated(int v) const { return v >= floor_; }

  /// Stored value for a raw gap n >= 1.
  int saturate(std::int64_t n) const;
  int next(int v) const { return saturate(static_cast<std::int64_t>(v) + 1); }
  /// Matrix power used for the landing law: v itself below the cap,
  /// otherwise the least n* >= cap congruent to v modulo the period.
  int law_exponent(int v) const;

 private:
  int cap_ = 1;
  int period_ = 1;
  int floor_ = 2;
};

struct MetaState {
  std::vector<std::uint32_t> state;
  std::vector<std::uint32_t> gap;

  auto operator<=>(const MetaState&) const = default;
};

struct ColorKey {
  std::uint32_t arm = 0;
  std::uint32_t state = 0;
  std::uint32_t gap_class = 1;
  std::uint32_t residue = 0;

  auto operator<=>(const ColorKey&) const = default;
};

/// State-action structure shared by the planner and the learner: a colour per
/// pair and, per pair, the successor reached for each landing state of the
/// chosen arm. Landing-state indexing is the canonical translation frame:
/// same-coloured pairs correspond landing state by landing state.
struct ColoredSkeleton {
  std::size_t states = 0;
  std::size_t actions = 0;
  std::vector<std::uint32_t> color;           // [s * actions + a]
  std::vector<std::uint32_t> offset;          // [s * actions + a] into successor
  std::vector<std::uint32_t> successor;       // flat, landing-indexed
  std::vector<std::uint32_t> landing_count;   // per colour
  std::size_t color_count = 0;

  std::uint32_t color_of(std::size_t s, std::size_t a) const { return color[s * actions + a]; }
  std::span<const std::uint32_t> successors(std::size_t s, std::size_t a) const {
    const std::size_t i = s * actions + a;
    return {successor.data() + offset[i], landing_count[color[i]]};
  }
};

/// The enumerated meta-state space for given per-arm layouts, with a dense
/// lookup table, successor table and colouring. Model-free: the learner
/// builds one from state counts and caps alone.
class MetaStateSpace {
 public:
  static constexpr std::size_t kDefaultSizeLimit = 1'000'000;

  explicit MetaStateSpace(std::vector<ArmLayout> arms, std::size_t size_limit = kDefaultSizeLimit);

  std::size_t size() const { return states_.size(); }
  std::size_t arm_count() const { return arms_.size(); }
  const std::vector<ArmLayout>& arms() const { return arms_; }
  const GapScheme& scheme(std::size_t arm) const { return schemes_[arm]; }
  const MetaState& state(std::size_t i) const { return states_[i]; }
  const std::vector<MetaState>& states() const { return states_; }
  std::optional<std::size_t> find(const MetaState& x) const;
  bool valid(const MetaState& x) const;

  /// Meta-state for a raw observation summary (gaps saturated).
  std::size_t encode(const ObservationSummary& summary) const;

  const ColoredSkeleton& skeleton() const { return skeleton_; }
  std::span<const std::uint32_t> successors(std::size_t x, std::size_t a) const { return skeleton_.successors(x, a); }
  std::uint32_t color(std::size_t x, std::size_t a) const { return skeleton_.color_of(x, a); }
  std::size_t color_count() const { return skeleton_.color_count; }
  const ColorKey& color_key(std::size_t c) const { return color_keys_[c]; }
  std::optional<std::size_t> color_id(const ColorKey& key) const;
  ColorKey color_of(std::size_t x, std::size_t a) const { return color_keys_[color(x, a)]; }

  /// Exponent n of the landing law P_a^n for choosing arm a in x.
  int law_exponent(std::size_t x, std::size_t a) const;
  std::size_t support_bound() const;

 private:
  std::size_t table_index(const MetaState& x) const;

  std::vector<ArmLayout> arms_;
  std::vector<GapScheme> schemes_;
  std::vector<MetaState> states_;
  std::vector<std::int32_t> table_;
  std::vector<std::size_t> radix_;
  std::vector<ColorKey> color_keys_;
  ColoredSkeleton skeleton_;
};

/// Bijection on states extending succ(x,a,l) -> succ(x',a',l).
class Translation {
 public:
  Translation() = default;
  explicit Translation(std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs);
  std::uint32_t operator()(std::uint32_t s) const;
  std::size_t moved() const { return map_.size(); }

 private:
  std::vector<std::pair<std::uint32_t, std::uint32_t>> map_;
};

struct StructureCheck {
  double max_reward_gap = 0.0;
  double max_translated_l1 = 0.0;
  std::size_t pairs_checked = 0;
};

enum class AggregationRule { lowest_gap, average };

/// An eps-structured MDP over meta-states: an Mdp together with its colouring,
/// translation frame and, per state, a representative meta-state.
class StructuredMdp {
 public:
  StructuredMdp(Mdp mdp, ColoredSkeleton skeleton, std::vector<ColorKey> color_keys,
                std::vector<double> landing_law, std::vector<MetaState> labels, double epsilon,
                std::size_t support_bound);

  const Mdp& mdp() const { return mdp_; }
  const ColoredSkeleton& skeleton() const { return skeleton_; }
  std::size_t size() const { return mdp_.state_count(); }
  double epsilon() const { return epsilon_; }
  std::size_t support_bound() const { return support_bound_; }
  std::size_t color_count() const { return skeleton_.color_count; }
  const ColorKey& color_key(std::size_t c) const { return color_keys_[c]; }
  ColorKey color_of(std::size_t x, std::size_t a) const { return color_keys_[skeleton_.color_of(x, a)]; }
  const MetaState& label(std::size_t x) const { return labels_[x]; }
  std::optional<std::size_t> find(const MetaState& x) const;

  /// Landing law over the chosen arm's states for pair (x, a).
  std::span<const double> landing_law(std::size_t x, std::size_t a) const;
  std::pair<std::vector<Transition>, double> transition_and_reward(std::size_t x, std::size_t a) const;

  /// Throws std::invalid_argument when the pairs are coloured differently.
  Translation translate(std::size_t x, std::size_t a, std::size_t x2, std::size_t a2) const;

  /// Largest reward gap and translated L1 distance over same-coloured pairs.
  StructureCheck check_structure() const;

 private:
  Mdp mdp_;
  ColoredSkeleton skeleton_;
  std::vector<ColorKey> color_keys_;
  std::vector<double> landing_law_;
  std::vector<MetaState> labels_;
  double epsilon_;
  std::size_t support_bound_;
};

/// Enumerates valid meta-states: exactly one fresh arm, distinct unsaturated
/// counters. Canonical lexicographic order.
MetaStateSpace enumerate_states(const std::vector<ArmLayout>& arms,
                                std::size_t size_limit = MetaStateSpace::kDefaultSizeLimit);

/// Builds the meta-state MDP of `arms` over `space` (known model).
StructuredMdp build_structured_mdp(const std::vector<ArmSpec>& arms, const MetaStateSpace& space, double epsilon);

/// Per-arm caps T_mix^j(eps). With `use_periods`, arms whose matrix has
/// period m > 1 get the cyclic mixing time and residue modulus m.
std::vector<ArmLayout> mixing_layouts(const std::vector<ArmSpec>& arms, double epsilon, bool use_periods = true);

/// Aggregated eps-structured MDP built directly with caps T_mix^j(eps).
StructuredMdp build_aggregated_mdp(const std::vector<ArmSpec>& arms, double epsilon,
                                   std::size_t size_limit = MetaStateSpace::kDefaultSizeLimit);

/// Exact T-step representation (counters saturate at `horizon`) coloured with
/// the T_mix^j(eps) gap classes.
StructuredMdp build_t_step_mdp(const std::vector<ArmSpec>& arms, int horizon, double epsilon,
                               std::size_t size_limit = MetaStateSpace::kDefaultSizeLimit);

/// Merges states whose colours agree for every action and whose translations
/// are the identity on the merged MDP (coarsest stable partition).
StructuredMdp aggregate(const StructuredMdp& mdp, AggregationRule rule = AggregationRule::lowest_gap);

}  // namespace restless
