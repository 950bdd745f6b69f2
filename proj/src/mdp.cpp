#include "restless/mdp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace restless {

Mdp::Mdp(std::size_t states, std::size_t actions)
    : states_(states), actions_(actions), reward_(states * actions, 0.0), rows_(states * actions) {}

void Mdp::set(std::size_t s, std::size_t a, double reward, std::vector<Transition> row) {
  if (s >= states_ || a >= actions_) throw std::out_of_range("Mdp::set: state or action out of range");
  for (const auto& tr : row)
    if (tr.to >= states_) throw std::out_of_range("Mdp::set: transition target out of range");
  reward_[s * actions_ + a] = reward;
  rows_[s * actions_ + a] = std::move(row);
}

void Mdp::validate(double tol) const {
  for (std::size_t s = 0; s < states_; ++s)
    for (std::size_t a = 0; a < actions_; ++a) {
      double sum = 0.0;
      for (const auto& tr : transitions(s, a)) sum += tr.prob;
      const double r = reward(s, a);
      if (std::abs(sum - 1.0) > tol || !(r >= 0.0 && r <= 1.0)) {
        std::ostringstream os;
        os << "Mdp: state " << s << " action " << a << " has row sum " << sum << " and reward " << r;
        throw std::logic_error(os.str());
      }
    }
}

}  // namespace restless
