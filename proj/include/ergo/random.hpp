#pragma once

#include <cstdint>
#include <random>

#include "ergo/matrix.hpp"

namespace ergo {

/// Deterministic sub-seed for task `stream` under a run seed (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Matrix with i.i.d. standard complex Gaussian entries.
template <class Rng>
CMatrix random_gaussian_matrix(Index d, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix x(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) {
      const double re = g(rng);
      const double im = g(rng);
      x(i, j) = Complex(re, im);
    }
  return x;
}

/// Gaussian matrix rescaled to unit spectral norm.
template <class Rng>
CMatrix random_unit_matrix(Index d, Rng& rng) {
  CMatrix x = random_gaussian_matrix(d, rng);
  return x / spectral_norm(x);
}

template <class Rng>
CMatrix random_hermitian(Index d, Rng& rng) {
  const CMatrix x = random_gaussian_matrix(d, rng);
  return 0.5 * (x + x.adjoint());
}

}  // namespace ergo
