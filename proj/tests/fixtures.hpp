#pragma once

// Compatible states built with the library, shared by the unit tests.

#include <rigami/rigami.hpp>

namespace fixture {

using namespace rigami;

inline const CreasePattern& miura() {
  static const CreasePattern p = generate_miura(3, 3, 1.0, 1.0, kPi / 3);
  return p;
}

inline const CreasePattern& waterbomb() {
  static const CreasePattern p = generate_waterbomb_base(1.0);
  return p;
}

/// Miura 3x3 folded until the zigzag reference crease reaches rho (< 0):
/// one step off the 1 degree seed, then 5 degree steps.
inline FoldState miura_state(double rho) {
  const Mechanism m(miura());
  const int z = miura_reference_creases(miura()).zigzag;
  FoldSchedule s;
  s.stages.push_back({{{z, -kPi / 36}}, {}, 1});
  if (rho < -kPi / 36) s.stages.push_back({{{z, rho}}, {}, 0});
  return run_schedule(m, flat_state_seed(m, deg2rad(1.0)), s).states.back();
}

/// Symmetric waterbomb state for the angle theta between axis and mountain
/// creases, assembled from the closed-form branch solution.
inline FoldState waterbomb_state(double theta) {
  const auto [rm, rv] = waterbomb_symmetric_oracle(theta);
  const CreasePattern& p = waterbomb();
  FoldState rho(static_cast<Eigen::Index>(p.num_creases()));
  for (std::size_t i = 0; i < p.num_creases(); ++i) {
    rho[static_cast<Eigen::Index>(i)] = p.creases()[i].assignment == Assignment::mountain ? rm : rv;
  }
  return rho;
}

}  // namespace fixture
