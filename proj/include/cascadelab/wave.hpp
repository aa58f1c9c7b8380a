#pragma once

// Iteration of G_{n+1}(x) = ∫ φ(y) G_n(x+y)² dy (φ the standard normal
// density) on a uniform grid whose window follows the front.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cascadelab {

inline constexpr double kLambda = 1.1774100225154747;  // sqrt(2 ln 2)
inline constexpr double kInfiniteAlpha = std::numeric_limits<double>::infinity();

struct Grid {
  double origin = -40.0;
  double dx = 0.02;
  std::size_t len = 4001;
};

struct WaveProfile {
  /// x of values[i] is base_origin + (origin_cells + i)·dx; the integer part
  /// carries every window shift exactly.
  double base_origin = 0.0;
  std::int64_t origin_cells = 0;
  double dx = 0.02;
  std::vector<double> values;
  /// 1 − values, carried separately so the right tail keeps full relative
  /// precision. Ignored unless 1 − complement[i] == values[i] for every i.
  std::vector<double> complement;
  double alpha_tag = kInfiniteAlpha;
  int n = 0;
  /// Set for an exact Heaviside step located at this x.
  std::optional<double> jump_at;

  double grid_origin() const noexcept {
    return base_origin + static_cast<double>(origin_cells) * dx;
  }
  double x_at(std::size_t i) const noexcept {
    return base_origin + static_cast<double>(origin_cells + static_cast<std::int64_t>(i)) * dx;
  }
  /// Four-point cubic interpolation; 0 left of the window, 1 right of it.
  double value_at(double x) const;
  /// Throws domain if the profile leaves [0,1] or decreases.
  void validate() const;
};

struct LeastSquaresFit {
  double linear = 0.0;
  double log = 0.0;
  double constant = 0.0;
  double linear_se = 0.0;
  double log_se = 0.0;
  double constant_se = 0.0;
  double log_ci_low = 0.0;
  double log_ci_high = 0.0;
  int points = 0;
};

struct FrontTrace {
  double alpha = kInfiniteAlpha;
  std::vector<double> m;      // m[k] is the front after k steps
  std::vector<double> width;  // x at 0.9 minus x at 0.1
  std::optional<LeastSquaresFit> fitted;
};

void validate_grid(const Grid& grid);

/// G_0(x) = exp(−e^{−αx}); α = inf gives the Heaviside step at 0.
WaveProfile init_profile(double alpha, const Grid& grid);

/// G_0(x) = (mean_j exp(−e^{−βλx} Y_j^β))^{1/2} from total-mass samples.
WaveProfile init_from_total_mass(double beta, std::span<const double> y_samples, const Grid& grid);

/// One step of the recursion without moving the window.
WaveProfile step_in_place(const WaveProfile& profile);
/// Moves the window by whole cells so that the front sits at the middle.
void recenter(WaveProfile& profile);
/// step_in_place, recenter, then the front-escape check.
WaveProfile step(const WaveProfile& profile);

/// x where the profile crosses `level` (1/2 for the front).
double level_crossing(const WaveProfile& profile, double level);
double front_position(const WaveProfile& profile);
double front_width(const WaveProfile& profile);

double c_alpha(double alpha);

/// Fits m_n ≈ a·n + b·log n + c over n in [first, last] with 95% interval for b.
LeastSquaresFit fit_front(std::span<const double> m, int first, int last);

FrontTrace run_front_tracking(double alpha, int iterations, const Grid& grid = {});
/// Same, starting from a given profile.
FrontTrace track_front(WaveProfile profile, int iterations);

struct CrossingReport {
  bool degenerate = false;
  bool ordered = false;  // no sign change at any step
  std::vector<std::optional<double>> crossings;  // per step, after stepping
  std::optional<int> violation_step;
};

/// Steps both profiles `steps` times with a common window and records where
/// p2 − p1 changes sign. Differences within 1e-9 count as zero.
CrossingReport crossing_check(const WaveProfile& p1, const WaveProfile& p2, int steps);

/// Exponent κ of 1 − φ(t) ~ t^κ as t → 0 read off the right tail of a
/// recentred profile of G_n^{(βλ)}: 1 − G² decays like e^{−κβλx}.
/// The fit uses the part of the tail where 1 − G² lies in [lo, hi].
double laplace_tail_exponent(const WaveProfile& profile, double beta, double lo = 1e-9,
                             double hi = 1e-3);

/// Runs G^{(βλ)} for `iterations` steps and returns laplace_tail_exponent.
double laplace_tail_run(double beta, int iterations, const Grid& grid = {});

/// Sup distance between two recentred profiles over [−span, span].
double recentred_distance(const WaveProfile& a, const WaveProfile& b, double span = 20.0);

/// Writes n, m_n, front_width rows.
void write_trace_csv(const FrontTrace& trace, const std::string& path);

}  // namespace cascadelab
