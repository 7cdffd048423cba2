#pragma once

#include <random>

#include "ncsoliton/lattice_algebra.hpp"

namespace ncsoliton::testing {

inline constexpr double kTheta = 0.41421356237309503;

// Coefficients decaying like e^{-|m|-|n|} so products stay well inside the box.
inline AlgebraElement random_element(const LatticeSpec& lattice, int radius, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  AlgebraElement a(lattice, radius);
  for (int m = -radius; m <= radius; ++m) {
    for (int n = -radius; n <= radius; ++n) {
      const double scale = std::exp(-0.7 * (std::abs(m) + std::abs(n)));
      a.set(m, n, scale * Complex(normal(rng), normal(rng)));
    }
  }
  return a;
}

// Spectrum inside [0.5, 1.5] whatever the truncation does to x*x.
inline AlgebraElement random_positive(const LatticeSpec& lattice, int radius, std::mt19937_64& rng) {
  const AlgebraElement x = random_element(lattice, radius, rng);
  const AlgebraElement xx = involution(x) * x;
  return AlgebraElement::identity(lattice, radius) + xx * (0.5 / xx.l1_norm());
}

}  // namespace ncsoliton::testing
