#include "cascadelab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "cascadelab/detail/fastmath.hpp"
#include "cascadelab/detail/sum.hpp"
#include "cascadelab/error.hpp"

namespace cascadelab {

namespace {

constexpr double kMinMass = 1e-300;
constexpr std::size_t kMinTailSamples = 1000;
// Exceedances required above the top of a plateau window.
constexpr std::size_t kPlateauTopCount = 30;

void check_samples(std::span<const double> s) {
  if (s.size() < kMinTailSamples) {
    throw Error(Errc::insufficient_samples,
                "need at least 1000 samples, got " + std::to_string(s.size()));
  }
  for (double x : s) {
    if (!(x > 0.0) || !std::isfinite(x)) throw Error(Errc::domain, "tail samples must be positive and finite");
  }
  if (std::all_of(s.begin(), s.end(), [&](double x) { return x == s.front(); })) {
    throw Error(Errc::degenerate_samples, "all samples are equal");
  }
}

std::vector<double> sorted_descending(std::span<const double> s) {
  std::vector<double> v(s.begin(), s.end());
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

double hill_sorted(const std::vector<double>& desc, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error(Errc::domain, "Hill fraction must lie in (0, 1)");
  const auto k = static_cast<std::size_t>(fraction * static_cast<double>(desc.size()));
  if (k < 2 || k >= desc.size()) throw Error(Errc::insufficient_samples, "too few order statistics for Hill");
  const double ref = std::log(desc[k]);
  std::vector<double> logs(k);
  for (std::size_t i = 0; i < k; ++i) logs[i] = std::log(desc[i]) - ref;
  const double h = detail::pairwise_sum(std::span<const double>(logs)) / static_cast<double>(k);
  if (!(h > 0.0)) throw Error(Errc::degenerate_samples, "top order statistics are all equal");
  return 1.0 / h;
}

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

// log Σ exp(t_i), deterministic.
double log_sum_exp(std::vector<double>& t) {
  if (t.empty()) return -std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : t) hi = std::max(hi, x);
  double* p = t.data();
  const std::size_t n = t.size();
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) p[i] = detail::fast_exp(p[i] - hi);
  return hi + std::log(detail::pairwise_sum(p, n));
}

}  // namespace

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(Errc::insufficient_samples, "linear fit needs two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(Errc::degenerate_samples, "linear fit needs distinct x");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.points = static_cast<int>(x.size());
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return f;
}

double hill_index(std::span<const double> samples, double fraction) {
  check_samples(samples);
  return hill_sorted(sorted_descending(samples), fraction);
}

TailEstimate tail_estimate(std::span<const double> samples) {
  check_samples(samples);
  const std::vector<double> desc = sorted_descending(samples);
  const std::size_t n = desc.size();
  TailEstimate est;
  est.n_samples = n;
  est.index_hat = hill_sorted(desc, kHillFraction);
  for (double f : {0.02, 0.05, 0.10}) est.sweep.emplace_back(f, hill_sorted(desc, f));

  // g at rank i (1-based) is x_(i)·i/n, the empirical x·P(X ≥ x).
  auto g = [&](std::size_t i) { return desc[i - 1] * static_cast<double>(i) / static_cast<double>(n); };
  // Candidate windows [x, 10x] with x between the median and the point where
  // fewer than kPlateauTopCount samples lie above 10x.
  const double x_min = desc[n / 2];
  const double x_top = desc[kPlateauTopCount - 1] / 10.0;
  std::size_t best_lo_rank = 0;
  std::size_t best_hi_rank = 0;
  double best_spread = std::numeric_limits<double>::infinity();
  if (x_top > x_min) {
    constexpr int kCandidates = 200;
    const double step = std::log(x_top / x_min) / kCandidates;
    for (int c = 0; c <= kCandidates; ++c) {
      const double lo = x_min * std::exp(step * c);
      const double hi = 10.0 * lo;
      // Ranks with lo ≤ x_(i) ≤ hi form a contiguous block [r_hi, r_lo].
      const auto r_hi = static_cast<std::size_t>(
          std::lower_bound(desc.begin(), desc.end(), hi, std::greater<>()) - desc.begin()) + 1;
      const auto r_lo = static_cast<std::size_t>(
          std::upper_bound(desc.begin(), desc.end(), lo, std::greater<>()) - desc.begin());
      if (r_lo < r_hi + 1) continue;
      double gmin = std::numeric_limits<double>::infinity();
      double gmax = -gmin;
      for (std::size_t i = r_hi; i <= r_lo; ++i) {
        const double v = std::log(g(i));
        gmin = std::min(gmin, v);
        gmax = std::max(gmax, v);
      }
      if (gmax - gmin < best_spread) {
        best_spread = gmax - gmin;
        best_lo_rank = r_lo;
        best_hi_rank = r_hi;
      }
    }
  }
  if (best_lo_rank == 0) {
    // No full decade available: fall back to the Hill range.
    best_lo_rank = static_cast<std::size_t>(kHillFraction * static_cast<double>(n));
    best_hi_rank = std::min<std::size_t>(kPlateauTopCount, best_lo_rank);
  }
  std::vector<double> window;
  for (std::size_t i = best_hi_rank; i <= best_lo_rank; ++i) window.push_back(g(i));
  est.plateau_hat = median_of(window);
  est.x_lo = desc[best_lo_rank - 1];
  est.x_hi = desc[best_hi_rank - 1];
  return est;
}

SpectrumEstimate structure_function(const DyadicMeasure& measure, std::span<const double> q_grid) {
  measure.validate();
  if (measure.level < 1 || measure.masses.empty()) throw Error(Errc::domain, "measure must have level >= 1");
  if (q_grid.empty()) throw Error(Errc::domain, "q grid is empty");
  for (double q : q_grid) {
    if (!(q >= -2.0 && q <= 4.0)) throw Error(Errc::domain, "q must lie in [-2, 4]");
  }
  SpectrumEstimate est;
  est.level = measure.level;
  est.q_grid.assign(q_grid.begin(), q_grid.end());
  std::vector<double> logs;
  std::vector<double> kept;
  logs.reserve(measure.masses.size());
  for (double m : measure.masses) {
    if (m > kMinMass) {
      logs.push_back(std::log(m));
      kept.push_back(m);
    } else {
      ++est.excluded_cells;
    }
  }
  if (logs.empty()) throw Error(Errc::degenerate_samples, "measure has no cell above 1e-300");
  const double scale = -1.0 / (static_cast<double>(measure.level) * std::log(2.0));
  std::vector<double> t(logs.size());
  for (double q : q_grid) {
    double log_sum;
    if (q == 0.0) {
      log_sum = std::log(static_cast<double>(logs.size()));
    } else if (q == 1.0) {
      log_sum = std::log(detail::pairwise_sum(std::span<const double>(kept)));
    } else {
      for (std::size_t i = 0; i < logs.size(); ++i) t[i] = q * logs[i];
      log_sum = log_sum_exp(t);
    }
    est.tau_hat.push_back(scale * log_sum);
  }
  return est;
}

SpectrumEstimate legendre_spectrum(SpectrumEstimate est) {
  const std::size_t n = est.q_grid.size();
  if (n < 2 || est.tau_hat.size() != n) throw Error(Errc::domain, "spectrum needs at least two (q, tau) points");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(est.q_grid[i] > est.q_grid[i - 1])) throw Error(Errc::domain, "q grid must be strictly increasing");
  }
  const auto& q = est.q_grid;
  std::vector<double> tau = est.tau_hat;
  auto slope = [&](std::size_t i, std::size_t j) { return (tau[j] - tau[i]) / (q[j] - q[i]); };
  bool concave = true;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = slope(i - 1, i);
    const double b = slope(i, i + 1);
    if (b > a + 1e-9 * (1.0 + std::abs(a))) concave = false;
  }
  if (!concave) {
    // Upper hull by monotone chain, then interpolate it back onto the grid.
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < n; ++i) {
      while (hull.size() >= 2) {
        const std::size_t a = hull[hull.size() - 2];
        const std::size_t b = hull.back();
        const double cross = (q[b] - q[a]) * (est.tau_hat[i] - est.tau_hat[a]) -
                             (est.tau_hat[b] - est.tau_hat[a]) * (q[i] - q[a]);
        if (cross >= 0.0) {
          hull.pop_back();
        } else {
          break;
        }
      }
      hull.push_back(i);
    }
    for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
      const std::size_t a = hull[h];
      const std::size_t b = hull[h + 1];
      for (std::size_t i = a; i <= b; ++i) {
        const double w = (q[i] - q[a]) / (q[b] - q[a]);
        tau[i] = est.tau_hat[a] + w * (est.tau_hat[b] - est.tau_hat[a]);
      }
    }
    est.majorant_applied = true;
  }
  est.tau_concave = tau;
  std::vector<double> gammas;
  for (std::size_t i = 0; i + 1 < n; ++i) gammas.push_back(slope(i, i + 1));
  std::sort(gammas.begin(), gammas.end());
  est.legendre.clear();
  for (double g : gammas) {
    if (!est.legendre.empty() && std::abs(g - est.legendre.back().first) <= 1e-12 * (1.0 + std::abs(g))) continue;
    double f = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) f = std::min(f, q[i] * g - tau[i]);
    est.legendre.emplace_back(g, f);
  }
  return est;
}

double legendre_value(const SpectrumEstimate& est, double gamma) {
  if (est.tau_concave.size() != est.q_grid.size() || est.q_grid.empty()) {
    throw Error(Errc::domain, "legendre_value needs the output of legendre_spectrum");
  }
  double f = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < est.q_grid.size(); ++i) f = std::min(f, est.q_grid[i] * gamma - est.tau_concave[i]);
  return f;
}

DimensionEstimate box_dimension(const CellPredicate& set, int depth_lo, int depth_hi) {
  if (depth_lo < 0 || depth_hi <= depth_lo || depth_hi > 40) {
    throw Error(Errc::domain, "depth range must satisfy 0 <= lo < hi <= 40");
  }
  std::vector<double> depth;
  std::vector<double> log_count;
  std::vector<std::uint64_t> cur;
  if (set(0, 0)) cur.push_back(0);
  for (int l = 0; l <= depth_hi; ++l) {
    if (l > 0) {
      std::vector<std::uint64_t> next;
      for (std::uint64_t k : cur) {
        if (set(l, 2 * k)) next.push_back(2 * k);
        if (set(l, 2 * k + 1)) next.push_back(2 * k + 1);
      }
      cur = std::move(next);
    }
    if (cur.empty()) throw Error(Errc::domain, "set is empty at depth " + std::to_string(l));
    if (l >= depth_lo) {
      depth.push_back(l);
      log_count.push_back(std::log2(static_cast<double>(cur.size())));
    }
  }
  const LinearFit fit = linear_fit(depth, log_count);
  DimensionEstimate d;
  d.zeta_hat = std::clamp(fit.slope, 0.0, 1.0);
  d.std_error = fit.slope_se;
  for (std::size_t i = 0; i < depth.size(); ++i) d.cover_sums.emplace_back(static_cast<int>(depth[i]), log_count[i]);
  d.depth_lo = depth_lo;
  d.depth_hi = depth_hi;
  d.method = DimensionEstimate::Method::euclidean_box;
  return d;
}

DimensionEstimate measure_dimension(const CellPredicate& set, const DyadicMeasure& measure, int depth_lo,
                                    int depth_hi) {
  measure.validate();
  if (depth_lo < 0 || depth_hi <= depth_lo || depth_hi > measure.level) {
    throw Error(Errc::domain, "depth range must satisfy 0 <= lo < hi <= measure level");
  }
  const double total = measure.total();
  if (!(total > 0.0)) throw Error(Errc::domain, "measure has no mass");

  // Pyramid of coarsened masses, level measure.level down to depth_lo.
  std::vector<std::vector<double>> pyramid(static_cast<std::size_t>(measure.level) + 1);
  pyramid[static_cast<std::size_t>(measure.level)] = measure.masses;
  for (int l = measure.level - 1; l >= depth_lo; --l) {
    const auto& fine = pyramid[static_cast<std::size_t>(l) + 1];
    auto& coarse = pyramid[static_cast<std::size_t>(l)];
    coarse.resize(fine.size() / 2);
    for (std::size_t i = 0; i < coarse.size(); ++i) coarse[i] = fine[2 * i] + fine[2 * i + 1];
  }

  // Cover cells per depth, descending to the measure's own level for the
  // atom check.
  std::vector<std::vector<double>> log_masses;
  std::vector<double> depth;
  std::vector<std::uint64_t> cur;
  if (set(0, 0)) cur.push_back(0);
  for (int l = 0; l <= measure.level; ++l) {
    if (l > 0) {
      std::vector<std::uint64_t> next;
      for (std::uint64_t k : cur) {
        if (set(l, 2 * k)) next.push_back(2 * k);
        if (set(l, 2 * k + 1)) next.push_back(2 * k + 1);
      }
      cur = std::move(next);
    }
    if (l == measure.level) {
      for (std::uint64_t k : cur) {
        if (measure.masses[k] > 0.5 * total) {
          throw Error(Errc::atomic_measure, "a covered cell carries more than half the mass");
        }
      }
    }
    if (l >= depth_lo && l <= depth_hi) {
      std::vector<double> lm;
      for (std::uint64_t k : cur) {
        const double m = pyramid[static_cast<std::size_t>(l)][k];
        if (m > kMinMass) lm.push_back(std::log(m));
      }
      if (lm.empty()) throw Error(Errc::degenerate_samples, "set carries no mass at depth " + std::to_string(l));
      log_masses.push_back(std::move(lm));
      depth.push_back(l);
    }
  }

  std::vector<double> work;
  auto log_sums = [&](double s) {
    std::vector<double> y;
    for (const auto& lm : log_masses) {
      work.resize(lm.size());
      for (std::size_t i = 0; i < lm.size(); ++i) work[i] = s * lm[i];
      y.push_back(log_sum_exp(work) / std::log(2.0));
    }
    return y;
  };
  auto slope_at = [&](double s) { return linear_fit(depth, log_sums(s)); };

  DimensionEstimate d;
  d.depth_lo = depth_lo;
  d.depth_hi = depth_hi;
  d.method = DimensionEstimate::Method::measure_box;
  auto finish = [&] {
    const std::vector<double> y = log_sums(d.zeta_hat);
    for (std::size_t i = 0; i < depth.size(); ++i) d.cover_sums.emplace_back(static_cast<int>(depth[i]), y[i]);
    return d;
  };
  const LinearFit at0 = slope_at(0.0);
  const LinearFit at1 = slope_at(1.0);
  if (at0.slope <= 0.0) {
    d.zeta_hat = 0.0;
    d.std_error = at0.slope_se;
    return finish();
  }
  if (at1.slope >= 0.0) {
    d.zeta_hat = 1.0;
    d.std_error = at1.slope_se;
    return finish();
  }
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 20; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope_at(mid).slope > 0.0 ? lo : hi) = mid;
  }
  d.zeta_hat = 0.5 * (lo + hi);
  // Delta method: the slope's standard error over its derivative in s.
  const double h = 1e-3;
  const double s_lo = std::max(0.0, d.zeta_hat - h);
  const double s_hi = std::min(1.0, d.zeta_hat + h);
  const double deriv = (slope_at(s_hi).slope - slope_at(s_lo).slope) / (s_hi - s_lo);
  const double se = slope_at(d.zeta_hat).slope_se;
  d.std_error = deriv != 0.0 ? se / std::abs(deriv) : 0.0;
  return finish();
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(Errc::insufficient_samples, "KS needs nonempty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

double ks_distance(std::span<const double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw Error(Errc::insufficient_samples, "KS needs nonempty samples");
  std::vector<double> x(a.begin(), a.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double level) {
  double c;
  if (level == 0.01) {
    c = 1.628;
  } else if (level == 0.05) {
    c = 1.358;
  } else if (level == 0.10) {
    c = 1.224;
  } else {
    throw Error(Errc::domain, "KS level must be 0.01, 0.05 or 0.10");
  }
  if (n == 0) throw Error(Errc::domain, "sample size must be positive");
  const double dn = static_cast<double>(n);
  if (m == 0) return c / std::sqrt(dn);
  const double dm = static_cast<double>(m);
  return c * std::sqrt((dn + dm) / (dn * dm));
}

}  // namespace cascadelab
