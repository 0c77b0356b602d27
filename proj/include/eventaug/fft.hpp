// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

namespace eventaug::fft {

using cplx = std::complex<double>;

namespace detail {

// In-place iterative radix-2 transform; a.size() must be a power of two.
inline void radix2(std::span<cplx> a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    std::vector<cplx> tw(half);
    for (std::size_t k = 0; k < half; ++k) {
      tw[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                                  static_cast<double>(len));
    }
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cplx u = a[i + k];
        const cplx v = a[i + k + half] * tw[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

// Bluestein's chirp-z: arbitrary n via a power-of-two circular convolution.
inline void bluestein(std::span<cplx> a, bool inverse) {
  const std::size_t n = a.size();
  const std::size_t m = std::bit_ceil(2 * n - 1);
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cplx> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle argument small and exact.
    const auto k2 = static_cast<unsigned long long>(k) * k % (2ULL * n);
    chirp[k] = std::polar(1.0, sign * std::numbers::pi * static_cast<double>(k2) /
                                   static_cast<double>(n));
  }
  std::vector<cplx> x(m), y(m);
  for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k];
  y[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) y[k] = y[m - k] = std::conj(chirp[k]);
  radix2(x, false);
  radix2(y, false);
  for (std::size_t k = 0; k < m; ++k) x[k] *= y[k];
  radix2(x, true);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * inv_m * chirp[k];
}

}  // namespace detail

/// Unnormalized forward DFT: X_k = sum_j x_j exp(-2 pi i jk / n).
inline void forward(std::span<cplx> a) {
  if (a.size() <= 1) return;
  if (std::has_single_bit(a.size())) {
    detail::radix2(a, false);
  } else {
    detail::bluestein(a, false);
  }
}

/// Inverse DFT including the 1/n factor.
inline void inverse(std::span<cplx> a) {
  if (a.empty()) return;
  if (a.size() > 1) {
    if (std::has_single_bit(a.size())) {
      detail::radix2(a, true);
    } else {
      detail::bluestein(a, true);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(a.size());
  for (auto& v : a) v *= inv_n;
}

}  // namespace eventaug::fft
