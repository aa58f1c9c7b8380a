#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace cascadelab::detail {

/// Pairwise sum with a fixed association order.
inline double pairwise_sum(const double* a, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(a, h) + pairwise_sum(a + h, n - h);
}

inline double pairwise_sum(std::span<const double> a) { return pairwise_sum(a.data(), a.size()); }

/// Sum of a power-of-two sized buffer by repeated halving; destroys the buffer.
inline double halving_sum(double* a, std::size_t n) {
  while (n > 1) {
    n /= 2;
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) a[i] = a[i] + a[i + n];
  }
  return n == 1 ? a[0] : 0.0;
}

/// A positive quantity stored as e^shift · sum.
struct ScaledSum {
  double shift = 0.0;
  double sum = 0.0;

  double log() const { return shift + std::log(sum); }
};

inline ScaledSum combine(const ScaledSum& a, const ScaledSum& b) {
  if (a.sum == 0.0) return b;
  if (b.sum == 0.0) return a;
  if (a.shift == b.shift) return {a.shift, a.sum + b.sum};
  const double s = a.shift > b.shift ? a.shift : b.shift;
  return {s, a.sum * std::exp(a.shift - s) + b.sum * std::exp(b.shift - s)};
}

/// Fixed-order pairwise combination.
inline ScaledSum combine_all(std::vector<ScaledSum> parts) {
  if (parts.empty()) return {};
  std::size_t n = parts.size();
  while (n > 1) {
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < n / 2; ++i) parts[i] = combine(parts[2 * i], parts[2 * i + 1]);
    if (n % 2 == 1) parts[n / 2] = parts[n - 1];
    n = half;
  }
  return parts[0];
}

inline double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -INFINITY) return a;
  return a + std::log1p(std::exp(b - a));
}

}  // namespace cascadelab::detail
