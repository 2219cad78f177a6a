#pragma once

// Shared generators and brute-force oracles for the unit tests.

#include <Eigen/Dense>

#include <cstdint>

#include "salsa/matrix.hpp"
#include "salsa/rng.hpp"

namespace salsa::testing {

inline Matrix gaussian(Index m, Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix a(m, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) a(i, j) = rng.normal();
  }
  return a;
}

inline Vector gaussian_vector(Index m, std::uint64_t seed) { return gaussian(m, 1, seed).col(0); }

/// diag(A (A^T A)^{-1} A^T) with the Gram inverse taken by full-pivot LU.
inline Vector explicit_hat_diagonal(const Matrix& a) {
  const Matrix ginv = (a.transpose() * a).fullPivLu().inverse();
  return (a * ginv).cwiseProduct(a).rowwise().sum();
}

/// (A^T A)^{-1} A^T b through the normal equations.
inline Vector normal_equations(const Matrix& a, const Vector& b) {
  return (a.transpose() * a).fullPivLu().solve(a.transpose() * b);
}

/// Gaussian matrix whose first `heavy` rows carry additive Cauchy noise.
inline Matrix gaussian_with_heavy_rows(Index m, Index n, Index heavy, double scale,
                                       std::uint64_t seed) {
  Matrix a = gaussian(m, n, seed);
  Rng rng(seed ^ 0x5bd1e995ULL);
  for (Index i = 0; i < heavy; ++i) {
    for (Index j = 0; j < n; ++j) a(i, j) += scale * rng.normal() / rng.normal();
  }
  return a;
}

}  // namespace salsa::testing
