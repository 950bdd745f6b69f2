#include "restless/random.hpp"

#include <algorithm>

namespace restless {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::size_t Rng::sample_cumulative(std::span<const double> cumulative) {
  const double u = uniform();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) {
    // u landed in the rounding gap above the final cumulative value; pick
    // the last entry that carries mass
    std::size_t i = cumulative.size() - 1;
    while (i > 0 && cumulative[i] <= cumulative[i - 1]) --i;
    return i;
  }
  return static_cast<std::size_t>(it - cumulative.begin());
}

}  // namespace restless
