#include "cascadelab/wave.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "cascadelab/detail/fastmath.hpp"
#include "cascadelab/error.hpp"

namespace cascadelab {

namespace {

constexpr double kKernelHalfWidth = 8.0;
constexpr double kEscapeLevel = 0.05;
constexpr double kRoundingSlack = 1e-12;
// Where the window stops, the complement is continued with the decay rate
// measured over the last kTailCells cells.
constexpr std::size_t kTailCells = 50;
// Fraction of the window left of the front after recentring.
constexpr double kFrontSlot = 0.4;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double sample_or_fill(const std::vector<double>& v, std::int64_t i) {
  if (i < 0) return 0.0;
  if (i >= static_cast<std::int64_t>(v.size())) return 1.0;
  return v[static_cast<std::size_t>(i)];
}

// Cubic through nodes −1, 0, 1, 2 evaluated at t in [0, 1].
double cubic4(double p0, double p1, double p2, double p3, double t) {
  const double a = t + 1.0;
  const double b = t - 1.0;
  const double c = t - 2.0;
  return (-p0 * t * b * c + 3.0 * p1 * a * b * c - 3.0 * p2 * a * t * c + p3 * a * t * b) / 6.0;
}

std::vector<double> gaussian_kernel(double dx) {
  const auto half = static_cast<std::size_t>(std::floor(kKernelHalfWidth / dx + 1e-9));
  std::vector<double> w(2 * half + 1);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double y = (static_cast<double>(k) - static_cast<double>(half)) * dx;
    w[k] = std::exp(-0.5 * y * y);
  }
  double mass = 0.0;
  for (double x : w) mass += x;
  for (double& x : w) x /= mass;
  return w;
}

// The stored complement is used only while it still reproduces values, so
// profiles edited through values alone stay consistent.
std::vector<double> complement_of(const WaveProfile& p) {
  if (p.complement.size() == p.values.size()) {
    bool consistent = true;
    for (std::size_t i = 0; i < p.values.size() && consistent; ++i) consistent = 1.0 - p.complement[i] == p.values[i];
    if (consistent) return p.complement;
  }
  std::vector<double> q(p.values.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = 1.0 - p.values[i];
  return q;
}

void set_from_complement(WaveProfile& p, std::vector<double> q) {
  p.values.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) p.values[i] = 1.0 - q[i];
  p.complement = std::move(q);
}

// Per-cell decay factor of an edge value relative to the one kTailCells
// further inside, in [0, 1].
double edge_ratio(double edge, double inner) {
  if (!(edge > 0.0) || !(inner > 0.0)) return 0.0;
  return std::min(1.0, std::pow(edge / inner, 1.0 / static_cast<double>(kTailCells)));
}

// Out-of-window continuation: G decays geometrically to the left of the
// window and 1 − G to the right, each at the rate seen at its edge.
struct EdgeFill {
  double left_value = 0.0;
  double left_ratio = 0.0;
  double right_value = 0.0;
  double right_ratio = 0.0;

  explicit EdgeFill(const std::vector<double>& q) {
    if (q.size() <= kTailCells) return;
    left_value = 1.0 - q.front();
    left_ratio = edge_ratio(left_value, 1.0 - q[kTailCells]);
    right_value = q.back();
    right_ratio = edge_ratio(right_value, q[q.size() - 1 - kTailCells]);
  }

  // Complement at cell i.
  double operator()(const std::vector<double>& q, std::int64_t i) const {
    const auto len = static_cast<std::int64_t>(q.size());
    if (i < 0) return 1.0 - left_value * std::pow(left_ratio, static_cast<double>(-i));
    if (i < len) return q[static_cast<std::size_t>(i)];
    return right_value * std::pow(right_ratio, static_cast<double>(i - len + 1));
  }
};

// Clamps into [0,1] and removes rounding-level increases of the complement;
// anything larger means the step itself went wrong.
void enforce_shape(std::vector<double>& q) {
  double running = 1.0;
  double worst = 0.0;
  for (double& x : q) {
    double y = std::clamp(x, 0.0, 1.0);
    worst = std::max(worst, std::abs(y - x));
    if (y > running) {
      worst = std::max(worst, y - running);
      y = running;
    }
    x = y;
    running = y;
  }
  if (worst > kRoundingSlack) {
    throw Error(Errc::domain, "wave step lost monotonicity or range by " + std::to_string(worst));
  }
}

void check_window(const WaveProfile& p) {
  if (p.jump_at) return;
  if (p.values.empty() || !(p.values.front() < kEscapeLevel) || !(p.values.back() > 1.0 - kEscapeLevel)) {
    throw Error(Errc::front_escape, "front left the window at n=" + std::to_string(p.n));
  }
}

void shift_cells(WaveProfile& p, std::int64_t s) {
  if (s == 0) return;
  const std::vector<double> q = complement_of(p);
  const EdgeFill fill(q);
  const auto len = static_cast<std::int64_t>(q.size());
  std::vector<double> out(q.size());
  for (std::int64_t i = 0; i < len; ++i) out[static_cast<std::size_t>(i)] = fill(q, i + s);
  set_from_complement(p, std::move(out));
  p.origin_cells += s;
}

std::int64_t centering_shift(const WaveProfile& p, double front) {
  const auto slot = static_cast<std::size_t>(kFrontSlot * static_cast<double>(p.values.size()));
  return static_cast<std::int64_t>(std::llround((front - p.x_at(slot)) / p.dx));
}

}  // namespace

void validate_grid(const Grid& grid) {
  if (!(grid.dx >= 0.005 && grid.dx <= 0.1)) throw Error(Errc::domain, "grid dx must lie in [0.005, 0.1]");
  if (!(static_cast<double>(grid.len) * grid.dx >= 60.0)) throw Error(Errc::domain, "grid must span at least 60");
  if (!std::isfinite(grid.origin)) throw Error(Errc::domain, "grid origin must be finite");
}

double WaveProfile::value_at(double x) const {
  if (jump_at) return x >= *jump_at ? 1.0 : 0.0;
  const double u = (x - grid_origin()) / dx;
  const double fl = std::floor(u);
  const auto i = static_cast<std::int64_t>(fl);
  const double t = u - fl;
  return std::clamp(cubic4(sample_or_fill(values, i - 1), sample_or_fill(values, i),
                                sample_or_fill(values, i + 1), sample_or_fill(values, i + 2), t),
                    0.0, 1.0);
}

void WaveProfile::validate() const {
  if (!(dx > 0.0)) throw Error(Errc::domain, "profile dx must be positive");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0 && values[i] <= 1.0)) throw Error(Errc::domain, "profile value outside [0,1]");
    if (i > 0 && values[i] < values[i - 1]) throw Error(Errc::domain, "profile is not nondecreasing");
  }
}

WaveProfile init_profile(double alpha, const Grid& grid) {
  validate_grid(grid);
  if (!(alpha > 0.0)) throw Error(Errc::domain, "alpha must be positive");
  WaveProfile p;
  p.base_origin = grid.origin;
  p.dx = grid.dx;
  p.alpha_tag = alpha;
  p.values.resize(grid.len);
  if (std::isinf(alpha)) {
    std::vector<double> q(grid.len);
    for (std::size_t i = 0; i < grid.len; ++i) q[i] = p.x_at(i) >= 0.0 ? 0.0 : 1.0;
    set_from_complement(p, std::move(q));
    p.jump_at = 0.0;
  } else {
    std::vector<double> q(grid.len);
    for (std::size_t i = 0; i < grid.len; ++i) q[i] = -std::expm1(-std::exp(-alpha * p.x_at(i)));
    set_from_complement(p, std::move(q));
    check_window(p);
  }
  return p;
}

WaveProfile init_from_total_mass(double beta, std::span<const double> y_samples, const Grid& grid) {
  validate_grid(grid);
  if (!(beta > 1.0) || !std::isfinite(beta)) throw Error(Errc::domain, "beta must exceed 1");
  if (y_samples.size() < 1000) {
    throw Error(Errc::insufficient_samples, "need at least 1000 total-mass samples, got " +
                                                std::to_string(y_samples.size()));
  }
  std::vector<double> log_yb(y_samples.size());
  for (std::size_t j = 0; j < y_samples.size(); ++j) {
    const double y = y_samples[j];
    if (!(y > 0.0) || !std::isfinite(y)) throw Error(Errc::domain, "total-mass samples must be positive and finite");
    log_yb[j] = beta * std::log(y);
  }
  WaveProfile p;
  p.base_origin = grid.origin;
  p.dx = grid.dx;
  p.alpha_tag = beta * kLambda;
  std::vector<double> q(grid.len);
  const double inv = 1.0 / static_cast<double>(log_yb.size());
  for (std::size_t i = 0; i < grid.len; ++i) {
    const double shift = -beta * kLambda * p.x_at(i);
    // Mean of 1 − exp(−a_j); the series branch keeps precision for tiny a.
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t j = 0; j < log_yb.size(); ++j) {
      const double a = detail::fast_exp(std::min(shift + log_yb[j], 700.0));
      const double series = a * (1.0 - a * (0.5 - a * (1.0 / 6.0 - a * (1.0 / 24.0))));
      const double direct = 1.0 - detail::fast_exp(-a);
      acc += a < 1e-3 ? series : direct;
    }
    // 1 − √(1 − m) written without cancellation.
    const double m = std::min(1.0, acc * inv);
    q[i] = m / (1.0 + std::sqrt(1.0 - m));
  }
  enforce_shape(q);
  set_from_complement(p, std::move(q));
  check_window(p);
  return p;
}

WaveProfile step_in_place(const WaveProfile& profile) {
  WaveProfile out = profile;
  out.n = profile.n + 1;
  out.jump_at.reset();
  const std::size_t len = profile.values.size();
  if (profile.jump_at) {
    // θ² = θ, so one step of a step function is exactly Φ shifted.
    std::vector<double> q(len);
    for (std::size_t i = 0; i < len; ++i) q[i] = normal_cdf(*profile.jump_at - profile.x_at(i));
    set_from_complement(out, std::move(q));
    return out;
  }
  // 1 − G_{n+1} = ∫ φ(y) (1 − G_n(x+y)²) dy and 1 − G² = q(2 − q).
  const std::vector<double> q = complement_of(profile);
  const EdgeFill fill(q);
  const std::vector<double> w = gaussian_kernel(profile.dx);
  const std::size_t half = w.size() / 2;
  std::vector<double> ext(len + 2 * half);
  for (std::size_t j = 0; j < ext.size(); ++j) {
    const double c = fill(q, static_cast<std::int64_t>(j) - static_cast<std::int64_t>(half));
    ext[j] = c * (2.0 - c);
  }
  std::vector<double> acc(len, 0.0);
  double* a = acc.data();
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double wk = w[k];
    const double* src = ext.data() + k;
#pragma omp simd
    for (std::size_t i = 0; i < len; ++i) a[i] += wk * src[i];
  }
  enforce_shape(acc);
  set_from_complement(out, std::move(acc));
  return out;
}

void recenter(WaveProfile& profile) {
  if (profile.jump_at) return;
  shift_cells(profile, centering_shift(profile, front_position(profile)));
}

WaveProfile step(const WaveProfile& profile) {
  WaveProfile out = step_in_place(profile);
  recenter(out);
  check_window(out);
  return out;
}

double level_crossing(const WaveProfile& profile, double level) {
  if (profile.jump_at) return *profile.jump_at;
  const auto& v = profile.values;
  const auto it = std::find_if(v.begin(), v.end(), [level](double x) { return x >= level; });
  if (it == v.begin() || it == v.end()) {
    throw Error(Errc::domain, "profile does not straddle level " + std::to_string(level));
  }
  const auto i = static_cast<std::int64_t>(it - v.begin());
  const double p0 = sample_or_fill(v, i - 2);
  const double p1 = v[static_cast<std::size_t>(i - 1)];
  const double p2 = v[static_cast<std::size_t>(i)];
  const double p3 = sample_or_fill(v, i + 1);
  // The linear crossing seeds a bisection on the cubic through the same nodes;
  // both agree at the nodes so the bracket [0,1] always holds a root.
  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < 60 && hi - lo > 1e-9; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (cubic4(p0, p1, p2, p3, mid) < level ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  return profile.base_origin + (static_cast<double>(profile.origin_cells + i - 1) + t) * profile.dx;
}

double front_position(const WaveProfile& profile) { return level_crossing(profile, 0.5); }

double front_width(const WaveProfile& profile) {
  return level_crossing(profile, 0.9) - level_crossing(profile, 0.1);
}

double c_alpha(double alpha) {
  if (!(alpha > 0.0)) throw Error(Errc::domain, "alpha must be positive");
  if (alpha >= kLambda) return kLambda;
  return alpha / 2.0 + std::log(2.0) / alpha;
}

LeastSquaresFit fit_front(std::span<const double> m, int first, int last) {
  if (first < 1 || last >= static_cast<int>(m.size()) || last - first + 1 < 4) {
    throw Error(Errc::insufficient_samples, "front fit needs at least 4 points with n >= 1");
  }
  const int rows = last - first + 1;
  Eigen::MatrixXd x(rows, 3);
  Eigen::VectorXd y(rows);
  for (int r = 0; r < rows; ++r) {
    const double n = first + r;
    x(r, 0) = n;
    x(r, 1) = std::log(n);
    x(r, 2) = 1.0;
    y(r) = m[static_cast<std::size_t>(first + r)];
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < 3) throw Error(Errc::degenerate_samples, "front fit design is rank deficient");
  const Eigen::Vector3d coef = qr.solve(y);
  const double rss = (y - x * coef).squaredNorm();
  const int dof = rows - 3;
  const double s2 = rss / dof;
  const Eigen::Matrix3d cov = s2 * (x.transpose() * x).inverse();
  LeastSquaresFit f;
  f.linear = coef(0);
  f.log = coef(1);
  f.constant = coef(2);
  f.linear_se = std::sqrt(std::max(0.0, cov(0, 0)));
  f.log_se = std::sqrt(std::max(0.0, cov(1, 1)));
  f.constant_se = std::sqrt(std::max(0.0, cov(2, 2)));
  const double tq = boost::math::quantile(boost::math::students_t(dof), 0.975);
  f.log_ci_low = f.log - tq * f.log_se;
  f.log_ci_high = f.log + tq * f.log_se;
  f.points = rows;
  return f;
}

FrontTrace track_front(WaveProfile profile, int iterations) {
  if (iterations < 10) throw Error(Errc::domain, "front tracking needs at least 10 iterations");
  FrontTrace trace;
  trace.alpha = profile.alpha_tag;
  trace.m.reserve(static_cast<std::size_t>(iterations) + 1);
  trace.m.push_back(front_position(profile));
  trace.width.push_back(front_width(profile));
  for (int k = 0; k < iterations; ++k) {
    profile = step(profile);
    trace.m.push_back(front_position(profile));
    trace.width.push_back(front_width(profile));
  }
  trace.fitted = fit_front(trace.m, iterations / 2, iterations);
  return trace;
}

FrontTrace run_front_tracking(double alpha, int iterations, const Grid& grid) {
  return track_front(init_profile(alpha, grid), iterations);
}

CrossingReport crossing_check(const WaveProfile& p1, const WaveProfile& p2, int steps) {
  if (p1.dx != p2.dx || p1.base_origin != p2.base_origin || p1.origin_cells != p2.origin_cells ||
      p1.values.size() != p2.values.size()) {
    throw Error(Errc::domain, "crossing check needs profiles on the same grid");
  }
  if (steps < 0) throw Error(Errc::domain, "steps must be nonnegative");
  constexpr double kMerge = 1e-9;
  CrossingReport report;
  WaveProfile a = p1;
  WaveProfile b = p2;
  bool any_nonzero = false;
  bool any_crossing = false;
  for (int s = 0; s <= steps; ++s) {
    if (s > 0) {
      a = step_in_place(a);
      b = step_in_place(b);
      const std::int64_t shift = centering_shift(a, front_position(a));
      shift_cells(a, shift);
      shift_cells(b, shift);
      check_window(a);
      check_window(b);
    }
    int sign = 0;
    int changes = 0;
    std::size_t last_index = 0;
    std::optional<double> where;
    const std::vector<double> qa = complement_of(a);
    const std::vector<double> qb = complement_of(b);
    for (std::size_t i = 0; i < qa.size(); ++i) {
      const double d = qa[i] - qb[i];
      if (std::abs(d) <= kMerge) continue;
      const int sg = d > 0.0 ? 1 : -1;
      any_nonzero = true;
      if (sign != 0 && sg != sign) {
        ++changes;
        where = 0.5 * (a.x_at(last_index) + a.x_at(i));
      }
      sign = sg;
      last_index = i;
    }
    report.crossings.push_back(where);
    if (changes > 0) any_crossing = true;
    if (changes > 1) {
      report.violation_step = s;
      break;
    }
  }
  report.degenerate = !any_nonzero;
  report.ordered = any_nonzero && !any_crossing;
  return report;
}

double laplace_tail_exponent(const WaveProfile& profile, double beta, double lo, double hi) {
  if (!(beta >= 1.0) || !std::isfinite(beta)) throw Error(Errc::domain, "beta must be at least 1");
  if (!(lo > 0.0 && lo < hi && hi < 1.0)) throw Error(Errc::domain, "tail window must satisfy 0 < lo < hi < 1");
  if (profile.jump_at) throw Error(Errc::domain, "step data has no tail to fit");
  const std::size_t start = static_cast<std::size_t>(
      std::find_if(profile.values.begin(), profile.values.end(), [](double v) { return v >= 0.5; }) -
      profile.values.begin());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  const std::vector<double> q = complement_of(profile);
  for (std::size_t i = start; i < q.size(); ++i) {
    const double r = q[i] * (2.0 - q[i]);
    if (r > hi) continue;
    if (r < lo) break;
    const double x = static_cast<double>(i) * profile.dx;
    const double y = std::log(r);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 10) throw Error(Errc::insufficient_samples, "too few tail points in the fit window");
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return -slope / (beta * kLambda);
}

double laplace_tail_run(double beta, int iterations, const Grid& grid) {
  if (!(beta >= 1.0) || !std::isfinite(beta)) throw Error(Errc::domain, "beta must be at least 1");
  WaveProfile p = init_profile(beta * kLambda, grid);
  for (int k = 0; k < iterations; ++k) p = step(p);
  return laplace_tail_exponent(p, beta);
}

double recentred_distance(const WaveProfile& a, const WaveProfile& b, double span) {
  const double ma = front_position(a);
  const double mb = front_position(b);
  const double h = std::min(a.dx, b.dx);
  double worst = 0.0;
  for (double x = -span; x <= span; x += h) worst = std::max(worst, std::abs(a.value_at(ma + x) - b.value_at(mb + x)));
  return worst;
}

void write_trace_csv(const FrontTrace& trace, const std::string& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!f) throw Error(Errc::io, "cannot open " + path);
  std::fprintf(f.get(), "n,m_n,front_width\r\n");
  for (std::size_t k = 0; k < trace.m.size(); ++k) {
    std::fprintf(f.get(), "%zu,%.17g,%.17g\r\n", k, trace.m[k], k < trace.width.size() ? trace.width[k] : 0.0);
  }
  if (std::fflush(f.get()) != 0) throw Error(Errc::io, "write failed for " + path);
}

}  // namespace cascadelab
