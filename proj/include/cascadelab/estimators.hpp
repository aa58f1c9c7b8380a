#pragma once

// Estimators that compare simulation output with limit laws: tail index,
// partition-function spectra, box and measure dimensions, KS distances.

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "cascadelab/cascade.hpp"
#include "cascadelab/dyadic.hpp"

namespace cascadelab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  int points = 0;
};

/// Ordinary least squares y ≈ slope·x + intercept.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct TailEstimate {
  double index_hat = 0.0;
  double plateau_hat = 0.0;
  double x_lo = 0.0;
  double x_hi = 0.0;
  std::size_t n_samples = 0;
  /// (fraction, index) for the sensitivity sweep.
  std::vector<std::pair<double, double>> sweep;
};

inline constexpr double kHillFraction = 0.05;

/// Hill index from the top `fraction` of the samples.
double hill_index(std::span<const double> samples, double fraction);

/// Hill index over the top 5%, and the plateau of x·P̂(X > x) over the
/// flattest decade.
TailEstimate tail_estimate(std::span<const double> samples);

struct SpectrumEstimate {
  int level = 0;
  std::vector<double> q_grid;
  std::vector<double> tau_hat;
  /// (γ, f̂) pairs, γ ascending.
  std::vector<std::pair<double, double>> legendre;
  /// The concave τ̂ the transform used (τ̂ itself unless the majorant applied).
  std::vector<double> tau_concave;
  bool majorant_applied = false;
  std::size_t excluded_cells = 0;
};

/// τ̂_n(q) = −(1/n) log₂ Σ_σ μ(I_σ)^q over cells with mass above 1e−300.
SpectrumEstimate structure_function(const DyadicMeasure& measure, std::span<const double> q_grid);

/// f̂(γ) = min_q (qγ − τ̂(q)) at the chord slopes γ of τ̂; a τ̂ that is not
/// concave is replaced by its concave majorant first (and flagged).
SpectrumEstimate legendre_spectrum(SpectrumEstimate est);

/// min_q (qγ − τ̂(q)) over the grid at any γ, using the concave τ̂ of a
/// spectrum returned by legendre_spectrum.
double legendre_value(const SpectrumEstimate& est, double gamma);

struct DimensionEstimate {
  enum class Method { euclidean_box, measure_box };
  double zeta_hat = 0.0;
  double std_error = 0.0;
  int depth_lo = 0;
  int depth_hi = 0;
  Method method = Method::euclidean_box;
  /// (depth, log₂ Σ ν(I)^s) at s = zeta_hat; the cover count for box dimensions.
  std::vector<std::pair<int, double>> cover_sums;
};

/// Slope of log₂(number of cells meeting K) against depth.
DimensionEstimate box_dimension(const CellPredicate& set, int depth_lo, int depth_hi);

/// The s at which Σ_{I ∈ cover_d(K)} ν(I)^s stops growing in d: bisection
/// (20 steps on [0, 1]) on the regression slope of log₂ of the sum.
/// Throws atomic_measure when a covered cell of the measure carries more than
/// half the total mass.
DimensionEstimate measure_dimension(const CellPredicate& set, const DyadicMeasure& measure, int depth_lo,
                                    int depth_hi);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance(std::span<const double> a, std::span<const double> b);
/// One-sample statistic against a continuous cdf.
double ks_distance(std::span<const double> a, const std::function<double(double)>& cdf);
/// Asymptotic critical value c(level)·sqrt((n+m)/(nm)); m = 0 means one-sample
/// (c(level)/sqrt(n)). Levels 0.01, 0.05 and 0.10.
double ks_critical_value(std::size_t n, std::size_t m, double level = 0.01);

}  // namespace cascadelab
