#pragma once

// The increment law of the cascade and the functions derived from its
// moment generating function: φ(s) = −log₂ E e^{sξ}, φ̃ = 1 − φ, τ = φ − 1,
// the Legendre transform τ*, the KPZ relation ζ₀ = φ(ζ) and q_β.

#include <string>

namespace cascadelab {

class SpectralModel {
 public:
  enum class Kind { gaussian_critical, gaussian_shifted, degenerate_stub };

  /// ξ ~ N(−2 ln 2, 2 ln 2), the model with E e^ξ = 1/2 and E ξ e^ξ = 0.
  static SpectralModel gaussian_critical();
  /// ξ ~ N(mean, variance); variance may be zero.
  static SpectralModel gaussian_shifted(double mean, double variance);
  /// ξ ≡ c.
  static SpectralModel degenerate_stub(double c);

  Kind kind() const noexcept { return kind_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }
  double stddev() const noexcept;

  std::string describe() const;

  friend bool operator==(const SpectralModel&, const SpectralModel&) = default;

 private:
  SpectralModel(Kind kind, double mean, double variance)
      : kind_(kind), mean_(mean), variance_(variance) {}

  Kind kind_ = Kind::gaussian_critical;
  double mean_ = 0.0;
  double variance_ = 0.0;
};

double phi(const SpectralModel& model, double s);
double phi_tilde(const SpectralModel& model, double s);
double tau(const SpectralModel& model, double s);
/// min(τ(s/α), 0)
double tau_alpha(const SpectralModel& model, double alpha, double s);

struct LegendrePoint {
  double gamma = 0.0;
  double value = 0.0;  // τ*(γ) = inf_t (tγ − τ(t))
  double argmin_t = 0.0;
};

/// τ*(γ). Accepts any finite γ inside the range of slopes of τ, and
/// γ = +inf, for which the value is −inf (argmin −inf). Throws Errc::unbounded
/// when the infimum is −inf for a finite γ.
LegendrePoint tau_star(const SpectralModel& model, double gamma);

/// The ζ ∈ [0,1] with φ(ζ) = ζ₀.
double kpz_solve(const SpectralModel& model, double zeta0);
/// α·kpz_solve(ζ₀).
double kpz_dual(const SpectralModel& model, double zeta0, double alpha);

/// The model of the normalized increments βξ − log(2 E e^{βξ}) that drive
/// the measure μ_β, so that measure-level quantities reuse φ, τ and kpz_solve.
SpectralModel measure_model(const SpectralModel& model, double beta);

/// L^q exponent of a measure whose dimension spectrum is τ* on {τ* ≥ 0}:
/// inf over that set of (qγ − τ*(γ)). Equals τ(q) where τ*(τ'(q)) ≥ 0 and
/// continues linearly with the boundary slope outside.
double lq_exponent(const SpectralModel& model, double q);

/// The root q > 1 of φ̃(βq) − qφ̃(β) = 0.
double q_beta(const SpectralModel& model, double beta);

}  // namespace cascadelab
