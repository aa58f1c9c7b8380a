#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "cascadelab/error.hpp"
#include "cascadelab/spectral.hpp"

using namespace cascadelab;
using doctest::Approx;

namespace {

const SpectralModel kCrit = SpectralModel::gaussian_critical();

// log2 of the Gaussian mgf, evaluated directly from mean and variance.
double phi_oracle(double mean, double var, double s) {
  return -(s * mean + 0.5 * s * s * var) / std::log(2.0);
}

}  // namespace

TEST_CASE("critical model normalization") {
  CHECK(kCrit.mean() == Approx(-2.0 * std::log(2.0)).epsilon(1e-15));
  CHECK(kCrit.variance() == Approx(2.0 * std::log(2.0)).epsilon(1e-15));
  // E e^xi = 1/2 and E xi e^xi = 0 for N(m, v): exp(m + v/2), (m + v) exp(m + v/2)
  CHECK(std::exp(kCrit.mean() + 0.5 * kCrit.variance()) == Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(kCrit.mean() + kCrit.variance()) < 1e-15);
}

TEST_CASE("phi examples") {
  CHECK(phi(kCrit, 1.0) == 1.0);
  CHECK(phi(kCrit, 0.0) == 0.0);
  CHECK(phi(kCrit, 0.5) == 0.75);
  CHECK(phi(kCrit, 2.0) == 0.0);
  CHECK(phi_tilde(kCrit, 1.0) == 0.0);
  CHECK(phi_tilde(kCrit, 0.5) == 0.25);
  CHECK(phi_tilde(kCrit, 0.0) == 1.0);
  CHECK(tau(kCrit, 1.0) == 0.0);
  CHECK(tau(kCrit, 0.0) == -1.0);
  CHECK(tau(kCrit, 3.0) == -4.0);
  for (const auto& m : {kCrit, SpectralModel::gaussian_shifted(0.3, 1.7),
                        SpectralModel::degenerate_stub(-0.4)}) {
    CHECK(phi(m, 0.0) == 0.0);
  }
  const auto g = SpectralModel::gaussian_shifted(-1.1, 0.9);
  for (double s = -3.0; s <= 3.0; s += 0.25) {
    CHECK(phi(g, s) == Approx(phi_oracle(-1.1, 0.9, s)).epsilon(1e-14));
  }
  CHECK(phi(SpectralModel::degenerate_stub(-std::log(2.0)), 3.0) == Approx(3.0));
  CHECK_THROWS_AS(SpectralModel::gaussian_shifted(0.0, -1.0), Error);
  CHECK_THROWS_AS(phi(kCrit, std::numeric_limits<double>::infinity()), Error);
}

TEST_CASE("closed-form suite on a 100-point grid") {
  for (int i = 0; i < 100; ++i) {
    const double s = -1.0 + 4.0 * i / 99.0;
    CHECK(std::abs(phi(kCrit, s) - (2.0 * s - s * s)) <= 1e-10);
    const double b = (i + 0.5) / 100.0;
    CHECK(std::abs(phi_tilde(kCrit, b) - (1.0 - b) * (1.0 - b)) <= 1e-10);
    CHECK(std::abs(q_beta(kCrit, b) - 1.0 / (b * b)) <= 1e-10 * std::max(1.0, 1.0 / (b * b)));
    const double g = 4.0 * i / 99.0;
    const auto p = tau_star(kCrit, g);
    CHECK(std::abs(p.value - (g - g * g / 4.0)) <= 1e-10);
    CHECK(std::abs(p.argmin_t - (1.0 - g / 2.0)) <= 1e-10);
    const double z0 = i / 99.0;
    CHECK(std::abs(kpz_solve(kCrit, z0) - (1.0 - std::sqrt(1.0 - z0))) <= 1e-10);
  }
}

TEST_CASE("tau_alpha examples") {
  CHECK(tau_alpha(kCrit, 0.5, 0.5) == 0.0);
  CHECK(tau_alpha(kCrit, 0.5, 0.0) == -1.0);
  CHECK(tau_alpha(kCrit, 0.5, 0.25) == Approx(-0.25));
  CHECK_THROWS_AS(tau_alpha(kCrit, 1.0, 0.25), Error);
}

TEST_CASE("tau_star examples and endpoints") {
  CHECK(tau_star(kCrit, 2.0).value == 1.0);
  CHECK(tau_star(kCrit, 2.0).argmin_t == 0.0);
  CHECK(tau_star(kCrit, 0.0).value == 0.0);
  CHECK(tau_star(kCrit, 4.0).value == 0.0);
  for (int i = 0; i <= 400; ++i) CHECK(tau_star(kCrit, i / 100.0).value >= 0.0);
  const auto inf = tau_star(kCrit, std::numeric_limits<double>::infinity());
  CHECK(inf.value == -std::numeric_limits<double>::infinity());
  CHECK(tau_star(kCrit, 5.0).value < 0.0);
}

TEST_CASE("numeric tau_star matches the Gaussian conjugate") {
  const double m = -0.7;
  const double v = 1.3;
  const auto g = SpectralModel::gaussian_shifted(m, v);
  const double ln2 = std::log(2.0);
  for (double gamma = -3.0; gamma <= 4.0; gamma += 0.37) {
    const double t = -(gamma * ln2 + m) / v;
    const double value = t * gamma + (t * m + 0.5 * t * t * v) / ln2 + 1.0;
    const auto p = tau_star(g, gamma);
    CHECK(p.value == Approx(value).epsilon(1e-10));
    CHECK(p.argmin_t == Approx(t).epsilon(1e-6));
    CHECK(p.value <= 1.0 + 1e-12);
  }
}

TEST_CASE("tau_star is unbounded outside the slope range of an affine tau") {
  const auto d = SpectralModel::degenerate_stub(-0.5);
  CHECK_THROWS_AS(tau_star(d, 0.0), Error);
  try {
    tau_star(d, 3.0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unbounded);
  }
  const double slope = 0.5 / std::log(2.0);
  CHECK(tau_star(d, slope).value == Approx(1.0));
}

TEST_CASE("phi is concave") {
  for (const auto& m : {kCrit, SpectralModel::gaussian_shifted(0.2, 0.5),
                        SpectralModel::degenerate_stub(1.0)}) {
    const double h = 1e-3;
    for (double s = -2.0; s <= 4.0; s += 0.05) {
      const double d2 = (phi(m, s + h) - 2.0 * phi(m, s) + phi(m, s - h)) / (h * h);
      CHECK(d2 <= 1e-8);
    }
  }
}

TEST_CASE("Legendre consistency over s in (0, 2)") {
  for (const auto& m : {kCrit, SpectralModel::gaussian_shifted(-1.0, 1.1)}) {
    for (int i = 1; i < 40; ++i) {
      const double s = 2.0 * i / 40.0;
      const double h = 1e-5;
      const double slope = (tau(m, s + h) - tau(m, s - h)) / (2.0 * h);
      CHECK(std::abs(tau_star(m, slope).value - (s * slope - tau(m, s))) <= 1e-8);
    }
  }
}

TEST_CASE("kpz_solve inverts phi") {
  CHECK(kpz_solve(kCrit, 1.0) == 1.0);
  CHECK(kpz_solve(kCrit, 0.0) == 0.0);
  CHECK(kpz_solve(kCrit, std::log(2.0) / std::log(3.0)) == Approx(0.392489).epsilon(1e-6));
  for (int i = 0; i <= 99; ++i) {
    const double s = i / 99.0;
    CHECK(std::abs(kpz_solve(kCrit, phi(kCrit, s)) - s) <= 1e-10);
  }
  CHECK_THROWS_AS(kpz_solve(kCrit, 1.2), Error);
  CHECK_THROWS_AS(kpz_solve(kCrit, -0.1), Error);
  CHECK(kpz_dual(kCrit, 1.0, 0.5) == 0.5);
  CHECK(kpz_dual(kCrit, 0.0, 0.9) == 0.0);
  CHECK(kpz_dual(kCrit, 0.630930, 0.5) == Approx(0.196245).epsilon(1e-5));
  CHECK_THROWS_AS(kpz_dual(kCrit, 0.5, 1.0), Error);
}

TEST_CASE("q_beta") {
  CHECK(q_beta(kCrit, 0.5) == Approx(4.0).epsilon(1e-13));
  CHECK(q_beta(kCrit, 0.25) == Approx(16.0).epsilon(1e-13));
  const double near = q_beta(kCrit, 0.999999);
  CHECK(near > 1.0);
  CHECK(near < 1.00001);
  for (double b : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    for (const auto& m : {kCrit, SpectralModel::gaussian_shifted(-1.0, 1.0)}) {
      const double q = q_beta(m, b);
      CHECK(q > 1.0);
      CHECK(std::abs(phi_tilde(m, b * q) - q * phi_tilde(m, b)) <= 1e-10);
    }
  }
  try {
    q_beta(SpectralModel::degenerate_stub(-0.3), 0.5);
    FAIL("expected no_root");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::no_root);
  }
  CHECK_THROWS_AS(q_beta(kCrit, 1.0), Error);
}

TEST_CASE("measure models") {
  // β = 1 reproduces the critical model.
  const SpectralModel one = measure_model(kCrit, 1.0);
  for (double s : {-1.0, 0.0, 0.5, 1.0, 2.0}) CHECK(phi(one, s) == Approx(2.0 * s - s * s).epsilon(1e-13));
  // μ_β has E Σ μ(I)^q = 2^{n(1 − φ(qβ) − q + qφ(β))}, so τ(q) = φ(qβ) + q(1 − φ(β)) − 1.
  for (double b : {0.3, 0.5, 0.8}) {
    const SpectralModel m = measure_model(kCrit, b);
    for (double q : {-1.0, 0.5, 1.0, 2.0}) {
      CHECK(tau(m, q) == Approx(phi(kCrit, q * b) + q * (1.0 - phi(kCrit, b)) - 1.0).epsilon(1e-12));
    }
    CHECK(std::abs(tau(m, 1.0)) < 1e-12);
  }
  CHECK(measure_model(SpectralModel::degenerate_stub(-1.0), 2.0).kind() == SpectralModel::Kind::degenerate_stub);
  CHECK_THROWS_AS(measure_model(kCrit, 0.0), Error);
}

TEST_CASE("L^q exponents") {
  // Critical model: −(q − 1)² on [−1, 1], 0 above, 4q below.
  for (double q = -3.0; q <= 4.0; q += 0.25) {
    const double expect = q > 1.0 ? 0.0 : q < -1.0 ? 4.0 * q : -(q - 1.0) * (q - 1.0);
    CHECK(lq_exponent(kCrit, q) == Approx(expect).epsilon(1e-12));
  }
  // Independent oracle: inf over {τ* ≥ 0} of qγ − τ*(γ), by brute force on a
  // fine γ grid from the tau_star operation.
  const SpectralModel m = measure_model(kCrit, 0.6);
  std::vector<std::pair<double, double>> spectrum;
  for (double g = -2.0; g <= 6.0; g += 1e-3) {
    try {
      const double f = tau_star(m, g).value;
      if (f >= 0.0) spectrum.emplace_back(g, f);
    } catch (const Error&) {
    }
  }
  REQUIRE(spectrum.size() > 100);
  for (double q : {-3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 3.0}) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [g, f] : spectrum) best = std::min(best, q * g - f);
    // The grid can miss the edge of {τ* ≥ 0} by one step of 1e-3.
    CHECK(std::abs(lq_exponent(m, q) - best) < (std::abs(q) + 1.0) * 1e-3);
  }
  // A stub measure is monofractal.
  const SpectralModel stub = SpectralModel::degenerate_stub(-std::log(2.0));
  CHECK(lq_exponent(stub, 3.0) == Approx(tau(stub, 3.0)));
}
