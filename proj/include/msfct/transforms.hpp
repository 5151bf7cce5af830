#pragma once

#include <cmath>

#include "msfct/core.hpp"

namespace msfct {

// Orthonormal DCT-II matrix: row k, column i.
template <class T>
MatrixX<T> dct_matrix(Index n) {
  MatrixX<T> d(n, n);
  const double scale0 = std::sqrt(1.0 / static_cast<double>(n));
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < n; ++i)
      d(k, i) = static_cast<T>((k == 0 ? scale0 : scale) *
                               std::cos(kPi * (2.0 * i + 1.0) * k / (2.0 * n)));
  return d;
}

// In-place multi-level orthonormal Haar over x[0..n), n a power of two.
// Approximation coefficients end up in front; x[0] is the DC.
template <class T>
void haar_forward(T* x, Index n, T* tmp) {
  const T inv_sqrt2 = static_cast<T>(0.70710678118654752440);
  for (Index len = n; len > 1; len /= 2) {
    const Index half = len / 2;
    for (Index i = 0; i < half; ++i) {
      tmp[i] = (x[2 * i] + x[2 * i + 1]) * inv_sqrt2;
      tmp[half + i] = (x[2 * i] - x[2 * i + 1]) * inv_sqrt2;
    }
    for (Index i = 0; i < len; ++i) x[i] = tmp[i];
  }
}

template <class T>
void haar_inverse(T* x, Index n, T* tmp) {
  const T inv_sqrt2 = static_cast<T>(0.70710678118654752440);
  for (Index len = 2; len <= n; len *= 2) {
    const Index half = len / 2;
    for (Index i = 0; i < half; ++i) {
      tmp[2 * i] = (x[i] + x[half + i]) * inv_sqrt2;
      tmp[2 * i + 1] = (x[i] - x[half + i]) * inv_sqrt2;
    }
    for (Index i = 0; i < len; ++i) x[i] = tmp[i];
  }
}

}  // namespace msfct
