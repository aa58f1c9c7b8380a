#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cascadelab/detail/fastmath.hpp"
#include "cascadelab/rng.hpp"

using namespace cascadelab;

TEST_CASE("philox known answers") {
  using philox::apply;
  CHECK(apply({0, 0, 0, 0}, {0, 0}) ==
        philox::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(apply({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        philox::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(apply({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        philox::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("batched words match single-counter words") {
  const StreamKey key{0x123456789abcdefull, 7, Stream::cascade};
  for (std::uint64_t first : {std::uint64_t{0}, std::uint64_t{1} << 20, (std::uint64_t{1} << 32) - 5}) {
    for (std::size_t count : {std::size_t{1}, std::size_t{7}, std::size_t{8}, std::size_t{37}}) {
      std::vector<std::uint64_t> w0(count), w1(count);
      philox::batch_words(static_cast<std::uint32_t>(key.seed),
                          static_cast<std::uint32_t>(key.seed >> 32), key.replica,
                          static_cast<std::uint32_t>(key.stream), first, count, w0.data(),
                          w1.data());
      for (std::size_t i = 0; i < count; ++i) {
        const auto w = key.words(first + i);
        CHECK(w0[i] == w[0]);
        CHECK(w1[i] == w[1]);
      }
    }
  }
}

TEST_CASE("streams and replicas are disjoint") {
  const StreamKey a{5, 0, Stream::cascade};
  StreamKey b = a;
  b.stream = Stream::subordinator;
  StreamKey c = a;
  c.replica = 1;
  CHECK(a.words(10) != b.words(10));
  CHECK(a.words(10) != c.words(10));
  CHECK(a.words(10) == StreamKey{5, 0, Stream::cascade}.words(10));
}

TEST_CASE("uniform conversions stay in range") {
  CHECK(unit_open_left(0) > 0.0);
  CHECK(unit_open_left(~std::uint64_t{0}) == 1.0);
  CHECK(unit_closed_left(0) == 0.0);
  CHECK(unit_closed_left(~std::uint64_t{0}) < 1.0);
}

TEST_CASE("engine is deterministic and roughly uniform") {
  PhiloxEngine e1({9, 0, Stream::sequential});
  PhiloxEngine e2({9, 0, Stream::sequential});
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto x = e1();
    CHECK_EQ(x, e2());
    sum += unit_closed_left(x);
  }
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("fast_log agrees with std::log") {
  std::mt19937_64 gen(1);
  double worst = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double u = unit_open_left(gen());
    worst = std::max(worst, std::abs(detail::fast_log(u) - std::log(u)) /
                                std::max(std::abs(std::log(u)), 1e-300));
  }
  for (double u : {1.0, 0.5, 0x1.0p-53, 0.7071067811865476, 1.4142135623730951, 3.0, 1e300}) {
    const double ref = std::log(u);
    CHECK(std::abs(detail::fast_log(u) - ref) <= 4e-16 * std::max(1.0, std::abs(ref)));
  }
  CHECK(worst < 4e-16);
}

TEST_CASE("fast_exp agrees with std::exp") {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> dist(-740.0, 709.0);
  double worst = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double x = dist(gen);
    const double ref = std::exp(x);
    if (ref < 1e-300) continue;
    worst = std::max(worst, std::abs(detail::fast_exp(x) - ref) / ref);
  }
  CHECK(worst < 4e-16);
  CHECK(detail::fast_exp(0.0) == 1.0);
  CHECK(std::isinf(detail::fast_exp(710.0)));
  CHECK(std::isinf(detail::fast_exp(1e6)));
  CHECK(detail::fast_exp(-800.0) == 0.0);
  CHECK(detail::fast_exp(-1e6) == 0.0);
  const double sub = detail::fast_exp(-740.0);
  CHECK(std::abs(sub - std::exp(-740.0)) <= 1e-3 * std::exp(-740.0));
}

TEST_CASE("uniform angle cos/sin is a rotation of 2*pi*u") {
  std::mt19937_64 gen(3);
  double worst = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double u = unit_closed_left(gen());
    double c;
    double s;
    detail::uniform_angle_cos_sin(u, c, s);
    const double theta = 2.0 * std::numbers::pi * u - std::numbers::pi / 4.0;
    worst = std::max({worst, std::abs(c - std::cos(theta)), std::abs(s - std::sin(theta))});
  }
  CHECK(worst < 2e-15);
}
