#include <cmath>

#include "cascadelab/cascade.hpp"
#include "cascadelab/detail/fastmath.hpp"

namespace cascadelab::detail {

namespace {

constexpr std::size_t kChunk = 512;

// Box-Muller pair from one Philox output.
inline void gaussian_pair(const IncrementLaw& law, std::uint64_t w0, std::uint64_t w1,
                          double& left, double& right) {
  const double u1 = unit_open_left(w0);
  const double u2 = unit_closed_left(w1);
  const double r = std::sqrt(-2.0 * fast_log(u1));
  double c;
  double s;
  uniform_angle_cos_sin(u2, c, s);
  left = law.mean + law.stddev * (r * c);
  right = law.mean + law.stddev * (r * s);
}

}  // namespace

void expand_level(const IncrementLaw& law, const StreamKey& key, int parent_depth,
                  std::uint64_t first_parent, std::uint64_t count, const double* parent_x,
                  double* child_x) {
  const auto k0 = static_cast<std::uint32_t>(key.seed);
  const auto k1 = static_cast<std::uint32_t>(key.seed >> 32);
  const auto stream = static_cast<std::uint32_t>(key.stream);
  const std::uint64_t base = (std::uint64_t{1} << parent_depth) + first_parent;
  const IncrementLaw l = law;
  alignas(64) std::uint64_t w0[kChunk];
  alignas(64) std::uint64_t w1[kChunk];
  for (std::uint64_t start = 0; start < count; start += kChunk) {
    const std::size_t m = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, count - start));
    philox::batch_words(k0, k1, key.replica, stream, base + start, m, w0, w1);
    const double* px = parent_x + start;
    double* cx = child_x + 2 * start;
#pragma omp simd
    for (std::size_t i = 0; i < m; ++i) {
      double left;
      double right;
      gaussian_pair(l, w0[i], w1[i], left, right);
      cx[2 * i] = px[i] + left;
      cx[2 * i + 1] = px[i] + right;
    }
  }
}

void increment_pair(const IncrementLaw& law, const StreamKey& key, std::uint64_t address,
                    double& left, double& right) {
  const auto w = key.words(address);
  gaussian_pair(law, w[0], w[1], left, right);
}

double path_sum(const IncrementLaw& law, const StreamKey& key, int depth, std::uint64_t index) {
  double x = 0.0;
  for (int d = 0; d < depth; ++d) {
    const std::uint64_t parent = index >> (depth - d);
    const bool right_child = ((index >> (depth - d - 1)) & 1u) != 0;
    double left;
    double right;
    increment_pair(law, key, (std::uint64_t{1} << d) + parent, left, right);
    x = x + (right_child ? right : left);
  }
  return x;
}

}  // namespace cascadelab::detail
