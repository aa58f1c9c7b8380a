#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <boost/math/special_functions/owens_t.hpp>

#include "cascadelab/error.hpp"
#include "cascadelab/wave.hpp"

using namespace cascadelab;
using doctest::Approx;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// P(Z1 − Y ≤ x, Z2 − Y ≤ x) for independent standard normals: a bivariate
// normal with variance 2 and correlation 1/2, via Owen's T.
double squared_phi_smoothed(double x) {
  const double h = x / std::sqrt(2.0);
  return normal_cdf(h) - 2.0 * boost::math::owens_t(h, 1.0 / std::sqrt(3.0));
}

WaveProfile sampled(const Grid& g, double (*f)(double), double shift = 0.0) {
  WaveProfile p;
  p.base_origin = g.origin;
  p.dx = g.dx;
  p.values.resize(g.len);
  for (std::size_t i = 0; i < g.len; ++i) p.values[i] = f(p.x_at(i) - shift);
  return p;
}

std::vector<WaveProfile> iterate(double alpha, int steps) {
  std::vector<WaveProfile> out{init_profile(alpha, Grid{})};
  for (int k = 0; k < steps; ++k) out.push_back(step(out.back()));
  return out;
}

}  // namespace

TEST_CASE("initial profiles") {
  const Grid g;
  const WaveProfile one = init_profile(1.0, g);
  CHECK(one.value_at(0.0) == Approx(std::exp(-1.0)).epsilon(1e-12));
  const WaveProfile heav = init_profile(kInfiniteAlpha, g);
  CHECK(heav.value_at(-0.01) == 0.0);
  CHECK(heav.value_at(0.0) == 1.0);
  const WaveProfile crit = init_profile(kLambda, g);
  crit.validate();
  CHECK(crit.values.back() > 1.0 - 1e-15);
  CHECK(std::is_sorted(crit.values.begin(), crit.values.end()));
  CHECK_THROWS_AS(init_profile(1.0, Grid{-40.0, 0.2, 4001}), Error);
  CHECK_THROWS_AS(init_profile(1.0, Grid{-20.0, 0.02, 2000}), Error);
  CHECK_THROWS_AS(init_profile(0.0, g), Error);
  // Broad data whose tail cannot fit the window is rejected.
  CHECK_THROWS_AS(init_profile(0.05, g), Error);
}

TEST_CASE("one step of Heaviside data is the normal cdf") {
  const WaveProfile g1 = step_in_place(init_profile(kInfiniteAlpha, Grid{}));
  double worst = 0.0;
  for (std::size_t i = 0; i < g1.values.size(); ++i) worst = std::max(worst, std::abs(g1.values[i] - normal_cdf(g1.x_at(i))));
  CHECK(worst < 1e-6);
  CHECK(std::abs(front_position(g1)) <= 0.02 * 1e-6);
}

TEST_CASE("quadrature step matches the bivariate normal closed form") {
  const Grid g;
  const WaveProfile phi = sampled(g, normal_cdf);
  const WaveProfile g1 = step_in_place(phi);
  double worst = 0.0;
  for (std::size_t i = 0; i < g1.values.size(); ++i) {
    const double x = g1.x_at(i);
    if (std::abs(x) > 25.0) continue;
    worst = std::max(worst, std::abs(g1.values[i] - squared_phi_smoothed(x)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("constant profiles are fixed points") {
  WaveProfile ones;
  ones.dx = 0.02;
  ones.values.assign(4001, 1.0);
  for (double v : step_in_place(ones).values) REQUIRE(v == 1.0);
  WaveProfile zeros = ones;
  zeros.values.assign(4001, 0.0);
  for (double v : step_in_place(zeros).values) REQUIRE(v == 0.0);
}

TEST_CASE("front position examples and translation") {
  const Grid g;
  CHECK(front_position(init_profile(kInfiniteAlpha, g)) == 0.0);
  const WaveProfile p = init_profile(1.0, g);
  const double m = front_position(p);
  CHECK(std::abs(m + std::log(std::log(2.0))) <= g.dx * 1e-6);
  // Whole-cell shift of the window is exact.
  WaveProfile moved = p;
  moved.origin_cells += 37;
  CHECK(front_position(moved) - m == Approx(37 * g.dx).epsilon(1e-12));
  // Resampling at an off-grid shift moves the front by the shift.
  for (double a : {0.313, -1.777, 2.5}) {
    WaveProfile s = p;
    for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] = std::exp(-std::exp(-(s.x_at(i) - a)));
    CHECK(std::abs(front_position(s) - m - a) < 1e-7);
  }
  WaveProfile low = p;
  low.values.assign(p.values.size(), 0.1);
  CHECK_THROWS_AS(front_position(low), Error);
}

TEST_CASE("step commutes with grid translation") {
  const Grid g;
  const int shift_cells = 50;
  const double a = shift_cells * g.dx;
  const WaveProfile base = init_profile(1.0, g);
  WaveProfile shifted = base;
  for (std::size_t i = 0; i < shifted.values.size(); ++i) shifted.values[i] = std::exp(-std::exp(-(shifted.x_at(i) - a)));
  shifted.complement.clear();
  const WaveProfile s0 = step_in_place(base);
  const WaveProfile s1 = step_in_place(shifted);
  double worst = 0.0;
  for (std::size_t i = 600; i + 600 < s1.values.size(); ++i) {
    worst = std::max(worst, std::abs(s1.values[i] - s0.values[i - shift_cells]));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("step keeps monotonicity and range along trajectories") {
  for (double alpha : {0.5, 1.0, kLambda, 3.0, kInfiniteAlpha}) {
    WaveProfile p = init_profile(alpha, Grid{});
    for (int k = 0; k < 60; ++k) {
      p = step(p);
      REQUIRE_NOTHROW(p.validate());
      REQUIRE(p.values.front() < 0.05);
      REQUIRE(p.values.back() > 0.95);
    }
  }
}

TEST_CASE("c_alpha closed form") {
  CHECK(c_alpha(0.5) == Approx(1.636294).epsilon(1e-6));
  CHECK(c_alpha(kLambda) == Approx(kLambda).epsilon(1e-12));
  CHECK(c_alpha(10.0) == Approx(1.177410).epsilon(1e-6));
  CHECK(c_alpha(kLambda * (1 - 1e-9)) == Approx(kLambda).epsilon(1e-9));
  CHECK_THROWS_AS(c_alpha(0.0), Error);
}

TEST_CASE("pulled front speed for alpha 0.5") {
  const FrontTrace t = run_front_tracking(0.5, 60);
  REQUIRE(t.m.size() == 61);
  CHECK(std::abs((t.m[60] - t.m[59]) - 1.636294) < 1e-3);
  for (std::size_t n = 2; n < t.m.size(); ++n) REQUIRE(t.m[n] > t.m[n - 1]);
  CHECK_THROWS_AS(run_front_tracking(0.5, 9), Error);
}

TEST_CASE("logarithmic front corrections separate the two regimes") {
  const FrontTrace heav = run_front_tracking(kInfiniteAlpha, 200);
  const FrontTrace crit = run_front_tracking(kLambda, 200);
  REQUIRE(heav.fitted);
  REQUIRE(crit.fitted);
  CHECK(std::abs(heav.fitted->log - (-3.0 / (2.0 * kLambda))) < 0.15);
  CHECK(std::abs(crit.fitted->log - (-1.0 / (2.0 * kLambda))) < 0.15);
  CHECK(heav.fitted->log_ci_high < crit.fitted->log_ci_low);
  CHECK(heav.fitted->linear == Approx(kLambda).epsilon(0.01));
}

TEST_CASE("front fit recovers planted coefficients") {
  std::vector<double> m(101);
  for (std::size_t n = 1; n < m.size(); ++n) m[n] = 1.25 * n - 0.8 * std::log(static_cast<double>(n)) + 3.0;
  const LeastSquaresFit f = fit_front(m, 50, 100);
  CHECK(f.linear == Approx(1.25).epsilon(1e-9));
  CHECK(f.log == Approx(-0.8).epsilon(1e-7));
  CHECK(f.constant == Approx(3.0).epsilon(1e-7));
  CHECK(f.points == 51);
  CHECK_THROWS_AS(fit_front(m, 0, 100), Error);
}

TEST_CASE("front speed never exceeds the asymptotic speed by more than 0.05") {
  for (double alpha : {0.5, 0.9, kLambda, 2.0, kInfiniteAlpha}) {
    const FrontTrace t = run_front_tracking(alpha, 120);
    const double bound = c_alpha(alpha) + 0.05;
    for (std::size_t n = 20; n + 1 < t.m.size(); ++n) REQUIRE(t.m[n + 1] - t.m[n] <= bound);
    if (alpha >= kLambda) {
      for (std::size_t n = 20; n + 1 < t.m.size(); ++n) REQUIRE(t.m[n + 1] - t.m[n] <= kLambda + 0.05);
    }
  }
}

TEST_CASE("crossing check") {
  const Grid g;
  const WaveProfile a = init_profile(0.8, g);
  SUBCASE("identical profiles are degenerate") {
    const CrossingReport r = crossing_check(a, a, 5);
    CHECK(r.degenerate);
    CHECK_FALSE(r.violation_step);
  }
  SUBCASE("single crossing persists") {
    // Steeper data with the same front: below on the left, above on the right.
    // Both fronts travel at the critical speed, so the crossing stays in view.
    const WaveProfile c = init_profile(1.3, g);
    WaveProfile b = c;
    const double mc = front_position(c);
    for (std::size_t i = 0; i < b.values.size(); ++i) {
      b.values[i] = std::exp(-std::log(2.0) * std::exp(-2.0 * (b.x_at(i) - mc)));
    }
    const CrossingReport r = crossing_check(c, b, 50);
    CHECK_FALSE(r.violation_step);
    CHECK_FALSE(r.degenerate);
    REQUIRE(r.crossings.size() == 51);
    REQUIRE(r.crossings.front().has_value());
    // The crossing may drift into the negligible left tail; once the
    // difference is one-signed it stays so.
    bool seen_ordered = false;
    for (const auto& x : r.crossings) {
      if (!x) seen_ordered = true;
      CHECK_FALSE((seen_ordered && x.has_value()));
    }
  }
  SUBCASE("ordered profiles stay ordered") {
    WaveProfile b = a;
    for (std::size_t i = 0; i < b.values.size(); ++i) b.values[i] = std::exp(-std::exp(-0.8 * (b.x_at(i) + 1.0)));
    b.complement.clear();
    const CrossingReport r = crossing_check(a, b, 30);
    CHECK(r.ordered);
    for (const auto& c : r.crossings) CHECK_FALSE(c.has_value());
  }
  SUBCASE("two sign changes are reported") {
    WaveProfile b = a;
    for (std::size_t i = 0; i < b.values.size(); ++i) {
      const double x = b.x_at(i);
      if (x > -1.5 && x < 1.5) b.values[i] += std::abs(x) < 0.5 ? 0.01 : -0.01;
    }
    b.complement.clear();
    const CrossingReport r = crossing_check(a, b, 3);
    REQUIRE(r.violation_step);
    CHECK(*r.violation_step == 0);
  }
}

TEST_CASE("recentred profiles are ordered in alpha on the right") {
  const int steps = 50;
  const auto lo = iterate(0.6, steps);
  const auto hi = iterate(1.0, steps);
  for (int n = 0; n <= steps; n += 5) {
    const double m_lo = front_position(lo[n]);
    const double m_hi = front_position(hi[n]);
    for (double x = 0.0; x <= 25.0; x += 0.05) {
      REQUIRE(hi[n].value_at(x + m_hi) >= lo[n].value_at(x + m_lo) - 1e-6);
    }
  }
}

TEST_CASE("recentred profiles converge") {
  for (double alpha : {1.0, kLambda, 2.0}) {
    const auto ps = iterate(alpha, 80);
    double prev = 1.0;
    for (int n : {5, 10, 20, 40}) {
      const double d = recentred_distance(ps[n], ps[2 * n]);
      CHECK(d < prev);
      prev = d;
    }
  }
  // The pulled front settles into a travelling wave with speed c(α).
  const auto ps = iterate(0.5, 61);
  CHECK(recentred_distance(ps[60], ps[61]) < 1e-6);
  CHECK(front_position(ps[61]) - front_position(ps[60]) == Approx(c_alpha(0.5)).epsilon(1e-6));
}

TEST_CASE("total-mass initial data") {
  const Grid g;
  std::vector<double> ones(2000, 1.0);
  const WaveProfile p = init_from_total_mass(2.0, ones, g);
  for (double x : {4.0, 6.0, 8.0}) {
    const double expect = 0.5 * std::exp(-2.0 * kLambda * x);
    CHECK((1.0 - p.value_at(x)) == Approx(expect).epsilon(2e-3));
  }
  CHECK(p.values.front() < 1e-12);
  CHECK_THROWS_AS(init_from_total_mass(2.0, std::vector<double>(999, 1.0), g), Error);
  CHECK_THROWS_AS(init_from_total_mass(1.0, ones, g), Error);
  std::vector<double> bad = ones;
  bad[3] = -1.0;
  CHECK_THROWS_AS(init_from_total_mass(2.0, bad, g), Error);
}

TEST_CASE("total-mass initial data from heavy-tailed samples has slope -lambda") {
  // Pareto(1) samples share the d/y tail of the critical total mass.
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> y(100000);
  for (double& v : y) v = 1.0 / (1.0 - u(rng));
  const WaveProfile p = init_from_total_mass(2.0, y, Grid{});
  // Regress log(1 − G₀) over the decade [1e-3, 1e-2].
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    const double q = p.complement[i];
    if (q > 1e-2 || q < 1e-3) continue;
    const double x = p.x_at(i);
    sx += x;
    sy += std::log(q);
    sxx += x * x;
    sxy += x * std::log(q);
    ++count;
  }
  REQUIRE(count > 50);
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  CHECK(std::abs(slope / kLambda + 1.0) < 0.05);
}

TEST_CASE("laplace tail exponent") {
  SUBCASE("planted exponential tail") {
    const Grid g;
    WaveProfile p;
    p.base_origin = g.origin;
    p.dx = g.dx;
    std::vector<double> q(g.len);
    for (std::size_t i = 0; i < g.len; ++i) {
      const double r = std::min(1.0, 0.5 * std::exp(-kLambda * p.x_at(i)));
      q[i] = r / (1.0 + std::sqrt(1.0 - r));
      p.values.push_back(1.0 - q[i]);
    }
    p.complement = q;
    CHECK(laplace_tail_exponent(p, 1.0) == Approx(1.0).epsilon(1e-3));
    // The same tail read for β = 2 means 1 − φ(t) ~ t^{1/2}.
    CHECK(laplace_tail_exponent(p, 2.0) == Approx(0.5).epsilon(1e-3));
  }
  SUBCASE("iterated profiles") {
    CHECK(laplace_tail_run(1.0, 200) >= 0.9);
    CHECK(std::abs(laplace_tail_run(2.0, 200) - 0.5) < 0.05);
  }
  CHECK_THROWS_AS(laplace_tail_exponent(init_profile(1.0, Grid{}), 0.5), Error);
}

TEST_CASE("trace csv export") {
  const FrontTrace t = run_front_tracking(1.0, 10);
  const auto path = std::filesystem::temp_directory_path() / "cascadelab_trace_test.csv";
  write_trace_csv(t, path.string());
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "n,m_n,front_width\r");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 11);
  std::filesystem::remove(path);
}
