#include "cascadelab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "cascadelab/error.hpp"

namespace cascadelab {

namespace {

constexpr double kLn2 = std::numbers::ln2;

bool is_critical(const SpectralModel& m) {
  return m.kind() == SpectralModel::Kind::gaussian_critical;
}

double tau_slope(const SpectralModel& m, double t, double h) {
  return (tau(m, t + h) - tau(m, t - h)) / (2.0 * h);
}

double tau_curvature(const SpectralModel& m, double t, double h) {
  return (tau(m, t + h) - 2.0 * tau(m, t) + tau(m, t - h)) / (h * h);
}

}  // namespace

SpectralModel SpectralModel::gaussian_critical() {
  return {Kind::gaussian_critical, -2.0 * kLn2, 2.0 * kLn2};
}

SpectralModel SpectralModel::gaussian_shifted(double mean, double variance) {
  if (!std::isfinite(mean) || !std::isfinite(variance) || variance < 0.0) {
    throw Error(Errc::domain, "gaussian model needs finite mean and variance >= 0");
  }
  return {Kind::gaussian_shifted, mean, variance};
}

SpectralModel SpectralModel::degenerate_stub(double c) {
  if (!std::isfinite(c)) throw Error(Errc::domain, "degenerate constant must be finite");
  return {Kind::degenerate_stub, c, 0.0};
}

double SpectralModel::stddev() const noexcept { return std::sqrt(variance_); }

std::string SpectralModel::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::gaussian_critical:
      return "gaussian_critical";
    case Kind::gaussian_shifted:
      os << "gaussian_shifted(mean=" << mean_ << ", variance=" << variance_ << ")";
      return os.str();
    case Kind::degenerate_stub:
      os << "degenerate_stub(c=" << mean_ << ")";
      return os.str();
  }
  return "unknown";
}

double phi(const SpectralModel& model, double s) {
  if (!std::isfinite(s)) throw Error(Errc::domain, "phi needs a finite argument");
  if (is_critical(model)) return 2.0 * s - s * s;
  return -(s * model.mean() + 0.5 * s * s * model.variance()) / kLn2;
}

double phi_tilde(const SpectralModel& model, double s) { return 1.0 - phi(model, s); }

double tau(const SpectralModel& model, double s) { return phi(model, s) - 1.0; }

double tau_alpha(const SpectralModel& model, double alpha, double s) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::domain, "tau_alpha needs alpha in (0,1)");
  return std::min(tau(model, s / alpha), 0.0);
}

LegendrePoint tau_star(const SpectralModel& model, double gamma) {
  if (std::isnan(gamma)) throw Error(Errc::domain, "tau_star at NaN");
  if (gamma == std::numeric_limits<double>::infinity()) {
    return {gamma, -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};
  }
  if (!std::isfinite(gamma)) {
    throw Error(Errc::unbounded, "tau_star is -inf at gamma = -inf");
  }
  if (is_critical(model)) return {gamma, gamma - 0.25 * gamma * gamma, 1.0 - 0.5 * gamma};

  if (model.variance() == 0.0) {
    // τ is affine with slope −mean/ln2; the infimum is finite only at that slope.
    const double slope = -model.mean() / kLn2;
    if (std::abs(gamma - slope) > 1e-12 * std::max(1.0, std::abs(slope))) {
      throw Error(Errc::unbounded, "tau_star: gamma outside the slope range of tau");
    }
    return {gamma, -tau(model, 0.0), 0.0};
  }

  auto f = [&](double t) { return t * gamma - tau(model, t); };
  double lo = -50.0;
  double hi = 50.0;
  constexpr double kTMax = 1e8;
  // τ concave ⇒ f convex; widen the bracket until f grows on both sides.
  for (;;) {
    const bool left_ok = f(lo) > f(lo + 1e-3 * (hi - lo));
    const bool right_ok = f(hi) > f(hi - 1e-3 * (hi - lo));
    if (left_ok && right_ok) break;
    if (!left_ok) lo *= 4.0;
    if (!right_ok) hi *= 4.0;
    if (-lo > kTMax || hi > kTMax) {
      throw Error(Errc::unbounded, "tau_star: gamma outside the slope range of tau");
    }
  }
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > 1e-10 * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = f(d);
    }
  }
  double t = 0.5 * (a + b);
  for (int i = 0; i < 3; ++i) {
    const double h = 1e-4 * std::max(1.0, std::abs(t));
    const double curv = tau_curvature(model, t, h);
    if (!(curv < 0.0)) break;
    const double step = (gamma - tau_slope(model, t, h)) / curv;
    const double next = t + step;
    if (!(f(next) <= f(t))) break;
    t = next;
  }
  return {gamma, f(t), t};
}

SpectralModel measure_model(const SpectralModel& model, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(Errc::domain, "beta must be positive and finite");
  const double v = beta * beta * model.variance();
  const double mean = beta * model.mean() - (kLn2 + beta * model.mean() + 0.5 * v);
  if (v == 0.0) return SpectralModel::degenerate_stub(mean);
  return SpectralModel::gaussian_shifted(mean, v);
}

double lq_exponent(const SpectralModel& model, double q) {
  if (!std::isfinite(q)) throw Error(Errc::domain, "lq_exponent needs a finite q");
  // τ(s) = A s − B s² − 1 gives τ*(τ'(s)) = 1 − B s², zero at s = ±1/√B.
  const double b = 0.5 * model.variance() / kLn2;
  if (b == 0.0) return tau(model, q);
  const double edge = 1.0 / std::sqrt(b);
  const double s = std::clamp(q, -edge, edge);
  const double slope = -model.mean() / kLn2 - 2.0 * b * s;
  return tau(model, s) + slope * (q - s);
}

double kpz_solve(const SpectralModel& model, double zeta0) {
  if (!(zeta0 >= 0.0 && zeta0 <= 1.0)) throw Error(Errc::domain, "kpz_solve needs zeta0 in [0,1]");
  double lo = 0.0;
  double hi = 1.0;
  const double flo = phi(model, lo);
  const double fhi = phi(model, hi);
  if (!(fhi > flo) || zeta0 < flo || zeta0 > fhi) {
    throw Error(Errc::domain, "kpz_solve: zeta0 outside phi([0,1]) or phi not increasing");
  }
  if (zeta0 == fhi) return 1.0;
  if (zeta0 == flo) return 0.0;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (phi(model, mid) < zeta0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double kpz_dual(const SpectralModel& model, double zeta0, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::domain, "kpz_dual needs alpha in (0,1)");
  return alpha * kpz_solve(model, zeta0);
}

double q_beta(const SpectralModel& model, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw Error(Errc::domain, "q_beta needs beta in (0,1)");
  auto g = [&](double q) { return phi_tilde(model, beta * q) - q * phi_tilde(model, beta); };
  constexpr double kQMax = 1e12;
  double hi = 2.0;
  while (!(g(hi) > 0.0)) {
    hi *= 2.0;
    if (hi > kQMax) throw Error(Errc::no_root, "q_beta: no root q > 1 for this model");
  }
  // g <= 0 on (1, q_beta] and > 0 beyond, so bisection from 1 brackets the root.
  double lo = 1.0;
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double q = 0.5 * (lo + hi);
  if (!(q > 1.0)) throw Error(Errc::no_root, "q_beta: root collapses onto q = 1");
  return q;
}

}  // namespace cascadelab
