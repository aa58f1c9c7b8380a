#include "cascadelab/harness.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>

#include "cascadelab/cascade.hpp"
#include "cascadelab/dyadic.hpp"
#include "cascadelab/error.hpp"
#include "cascadelab/estimators.hpp"
#include "cascadelab/levy.hpp"
#include "cascadelab/parallel.hpp"
#include "cascadelab/spectral.hpp"
#include "cascadelab/wave.hpp"

namespace cascadelab {

namespace {

using json = nlohmann::ordered_json;

constexpr double kCantorDimension = 0.63092975357145743;  // log 2 / log 3
constexpr int kKpzDepthLo = 8;
constexpr int kKpzDepthHi = 18;
constexpr double kSpectrumStep = 0.05;
constexpr std::uint64_t kMiB = 1024 * 1024;

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::pair<double, double> mean_and_se(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  const double n = static_cast<double>(v.size());
  const double mean = s / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

constexpr int kMaxmassBankDepth = 16;
constexpr int kMaxmassBankSize = 8192;
constexpr int kQuantileTableLevels = 20;

// Quantile table of 2^20 midpoints: empirical below the top 5%, and above it
// the h(x) ~ d/x law fitted at the threshold. A finite bank alone caps Y at
// its largest sample, which starves the many small cells of deep cascades.
std::vector<double> tail_extended_quantiles(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const double b = static_cast<double>(samples.size());
  const double k = std::ceil(kHillFraction * b);
  const double threshold = samples[samples.size() - static_cast<std::size_t>(k)];
  const std::size_t size = std::size_t{1} << kQuantileTableLevels;
  std::vector<double> out(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(size);
    const double upper = 1.0 - u;
    out[i] = upper < k / b ? threshold * (k / b) / upper : samples[static_cast<std::size_t>(u * b)];
  }
  return out;
}

std::string level_tag(int n) { return "_n" + std::to_string(n); }

CascadeSpec cascade_spec(const ExperimentConfig& c, int n, std::uint32_t first_replica) {
  CascadeSpec s;
  s.level_n = n;
  s.seed = c.seed;
  s.beta = c.beta;
  s.replica = first_replica;
  s.model = SpectralModel::gaussian_critical();
  return s;
}

std::vector<double> q_grid(double lo, double hi) {
  std::vector<double> q;
  const int count = static_cast<int>(std::lround((hi - lo) / kSpectrumStep));
  for (int i = 0; i <= count; ++i) q.push_back(lo + kSpectrumStep * i);
  return q;
}

std::uint32_t replica_offset(std::size_t k, int replicas) {
  return static_cast<std::uint32_t>(k * static_cast<std::size_t>(replicas));
}

// Independent replica blocks per depth keep different depths uncorrelated.
void run_normalization(const ExperimentConfig& c, int threads, ExperimentReport& rep) {
  Table t{"totals", {"n", "replica", "value"}, {}};
  std::vector<std::vector<double>> samples;
  for (std::size_t k = 0; k < c.n_list.size(); ++k) {
    const int n = c.n_list[k];
    const std::uint32_t first = replica_offset(k, c.replicas);
    std::vector<double> v = sample_total_mass(cascade_spec(c, n, first), c.beta, c.replicas, threads);
    rep.streams.push_back({"cascade", first, static_cast<std::uint32_t>(c.replicas)});
    for (std::size_t r = 0; r < v.size(); ++r) t.rows.push_back({double(n), double(r), v[r]});
    const auto [mean, se] = mean_and_se(v);
    rep.statistics.emplace_back("mean" + level_tag(n), mean);
    rep.statistics.emplace_back("std_error" + level_tag(n), se);
    rep.statistics.emplace_back("median" + level_tag(n), median(v));
    if (c.beta < 1.0 && se > 0.0) rep.checks.push_back(make_check("mean_z_score" + level_tag(n), (mean - 1.0) / se, -3.0, 3.0));
    samples.push_back(std::move(v));
  }
  if (c.beta >= 1.0 && samples.size() >= 2) {
    const double d = ks_distance(samples.front(), samples.back());
    const double crit = ks_critical_value(samples.front().size(), samples.back().size());
    rep.statistics.emplace_back("ks_first_last", d);
    rep.statistics.emplace_back("ks_critical_1pct", crit);
    rep.checks.push_back(make_check("ks_first_last", d, 0.0, crit));
  }
  rep.tables.push_back(std::move(t));
}

void run_maxmass(const ExperimentConfig& c, int threads, ExperimentReport& rep) {
  Table t{"max_mass", {"n", "replica", "max_mass"}, {}};
  Table s{"scaled_medians", {"n", "median", "n^0.3*median", "n^0.8*median"}, {}};
  const std::size_t depths = c.n_list.size();
  const auto reps = static_cast<std::size_t>(c.replicas);
  std::vector<std::vector<double>> v(depths, std::vector<double>(reps));
  if (c.beta == 1.0) {
    // The cell masses of μ₁ are e^{X_σ}·Y_σ with independent copies Y_σ of
    // the critical total mass, drawn from tail-extended depth-16 totals on
    // replicas disjoint from the main ones. Each replica is one realization
    // of μ₁ at the deepest level, summed up to the shallower ones, so that
    // every depth sees the same measure.
    const auto first = static_cast<std::uint32_t>(c.replicas);
    const std::vector<double> bank = tail_extended_quantiles(
        sample_total_mass(cascade_spec(c, kMaxmassBankDepth, first), 1.0, kMaxmassBankSize, threads));
    rep.streams.push_back({"cascade", first, static_cast<std::uint32_t>(kMaxmassBankSize)});
    const int deepest = *std::max_element(c.n_list.begin(), c.n_list.end());
    std::vector<std::size_t> by_depth(depths);
    std::iota(by_depth.begin(), by_depth.end(), std::size_t{0});
    std::stable_sort(by_depth.begin(), by_depth.end(),
                     [&](std::size_t a, std::size_t b) { return c.n_list[a] > c.n_list[b]; });
    parallel_for(reps, threads, [&](std::size_t r) {
      DyadicMeasure m =
          semistable_measure(LeafEnsemble(cascade_spec(c, deepest, static_cast<std::uint32_t>(r))), bank);
      for (std::size_t k : by_depth) {
        m = m.coarsen(c.n_list[k]);
        v[k][r] = max_leaf_mass(m);
      }
    });
    rep.streams.push_back({"cascade", 0, static_cast<std::uint32_t>(c.replicas)});
    rep.streams.push_back({"resample", 0, static_cast<std::uint32_t>(c.replicas)});
  } else {
    // Depth-n normalized measures do not nest; replica r still shares its
    // tree across depths.
    for (std::size_t k = 0; k < depths; ++k) {
      parallel_for(reps, threads, [&](std::size_t r) {
        const LeafEnsemble ens(cascade_spec(c, c.n_list[k], static_cast<std::uint32_t>(r)));
        v[k][r] = max_leaf_mass(build_measure(ens, c.beta));
      });
    }
    rep.streams.push_back({"cascade", 0, static_cast<std::uint32_t>(c.replicas)});
  }
  std::vector<double> low, high;
  for (std::size_t k = 0; k < depths; ++k) {
    const int n = c.n_list[k];
    for (std::size_t r = 0; r < reps; ++r) t.rows.push_back({double(n), double(r), v[k][r]});
    const double m = median(v[k]);
    low.push_back(std::pow(n, 0.3) * m);
    high.push_back(std::pow(n, 0.8) * m);
    s.rows.push_back({double(n), m, low.back(), high.back()});
    rep.statistics.emplace_back("median" + level_tag(n), m);
  }
  if (c.beta == 1.0 && low.size() >= 2) {
    double worst_low = 0.0;
    double worst_high = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < low.size(); ++k) {
      worst_low = std::max(worst_low, low[k] / low[k - 1]);
      worst_high = std::min(worst_high, high[k] / high[k - 1]);
    }
    // Strict monotonicity: every consecutive ratio below (above) one.
    rep.checks.push_back(make_check("n^0.3_max_ratio", worst_low, 0.0, std::nextafter(1.0, 0.0)));
    rep.checks.push_back(make_check("n^0.8_min_ratio", worst_high, std::nextafter(1.0, 2.0),
                                    std::numeric_limits<double>::max()));
  }
  rep.tables.push_back(std::move(t));
  rep.tables.push_back(std::move(s));
}

void run_modulus(const ExperimentConfig& c, int threads, ExperimentReport& rep) {
  Table t{"modulus", {"n", "replica", "statistic"}, {}};
  std::vector<double> log_n, log_med;
  // Shared replicas across depths, as for the max leaf mass.
  for (std::size_t k = 0; k < c.n_list.size(); ++k) {
    const int n = c.n_list[k];
    const std::uint32_t first = 0;
    std::vector<double> v(static_cast<std::size_t>(c.replicas));
    parallel_for(v.size(), threads, [&](std::size_t r) {
      const LeafEnsemble ens(cascade_spec(c, n, first + static_cast<std::uint32_t>(r)));
      v[r] = modulus_statistic(build_measure(ens, c.beta), c.gamma);
    });
    rep.streams.push_back({"cascade", first, static_cast<std::uint32_t>(c.replicas)});
    for (std::size_t r = 0; r < v.size(); ++r) t.rows.push_back({double(n), double(r), v[r]});
    const double m = median(v);
    rep.statistics.emplace_back("median" + level_tag(n), m);
    log_n.push_back(std::log(n));
    log_med.push_back(std::log(m));
  }
  if (log_n.size() >= 3) {
    const LinearFit f = linear_fit(log_n, log_med);
    rep.statistics.emplace_back("drift_exponent", f.slope);
    rep.statistics.emplace_back("drift_exponent_se", f.slope_se);
  }
  rep.tables.push_back(std::move(t));
}

void run_tail(const ExperimentConfig& c, int threads, ExperimentReport& rep) {
  const int n = c.n_list.front();
  const std::vector<double> v = sample_total_mass(cascade_spec(c, n, 0), c.beta, c.replicas, threads);
  rep.streams.push_back({"cascade", 0, static_cast<std::uint32_t>(c.replicas)});
  const TailEstimate e = tail_estimate(v);
  rep.statistics.emplace_back("index_hat", e.index_hat);
  rep.statistics.emplace_back("plateau_hat", e.plateau_hat);
  rep.statistics.emplace_back("x_lo", e.x_lo);
  rep.statistics.emplace_back("x_hi", e.x_hi);
  rep.statistics.emplace_back("n_samples", static_cast<double>(e.n_samples));
  Table sweep{"hill_sweep", {"fraction", "index_hat"}, {}};
  for (const auto& [f, idx] : e.sweep) sweep.rows.push_back({f, idx});
  Table samples{"samples", {"replica", "value"}, {}};
  for (std::size_t r = 0; r < v.size(); ++r) samples.rows.push_back({double(r), v[r]});
  // x·P̂(X ≥ x) at log-spaced ranks.
  std::vector<double> desc = v;
  std::sort(desc.begin(), desc.end(), std::greater<>());
  Table curve{"tail_curve", {"x", "x_times_tail"}, {}};
  const double count = static_cast<double>(desc.size());
  std::size_t last = 0;
  for (int i = 0; i <= 200; ++i) {
    const auto rank = static_cast<std::size_t>(std::llround(std::pow(count, i / 200.0)));
    if (rank == last || rank > desc.size()) continue;
    last = rank;
    curve.rows.push_back({desc[rank - 1], desc[rank - 1] * static_cast<double>(rank) / count});
  }
  if (c.beta == 1.0) rep.checks.push_back(make_check("index_hat", e.index_hat, 0.85, 1.15));
  rep.tables.push_back(std::move(sweep));
  rep.tables.push_back(std::move(curve));
  rep.tables.push_back(std::move(samples));
}

void run_wavefront(const ExperimentConfig& c, ExperimentReport& rep) {
  Grid g;
  g.dx = c.dx;
  g.len = static_cast<std::size_t>(std::llround(-2.0 * g.origin / c.dx)) + 1;
  const FrontTrace tr = run_front_tracking(c.alpha, c.iterations, g);
  const std::size_t last = tr.m.size() - 1;
  const double speed = tr.m[last] - tr.m[last - 1];
  const double target = c_alpha(c.alpha);
  rep.statistics.emplace_back("speed", speed);
  rep.statistics.emplace_back("c_alpha", target);
  rep.statistics.emplace_back("front", tr.m[last]);
  rep.statistics.emplace_back("width", tr.width[last]);
  if (tr.fitted) {
    rep.statistics.emplace_back("fit_linear", tr.fitted->linear);
    rep.statistics.emplace_back("fit_log", tr.fitted->log);
    rep.statistics.emplace_back("fit_log_ci_low", tr.fitted->log_ci_low);
    rep.statistics.emplace_back("fit_log_ci_high", tr.fitted->log_ci_high);
  }
  rep.checks.push_back(make_check("speed_minus_c_alpha", speed - target, -1e-3, 1e-3));
  Table t{"trace", {"n", "m_n", "front_width"}, {}};
  for (std::size_t k = 0; k < tr.m.size(); ++k) t.rows.push_back({double(k), tr.m[k], tr.width[k]});
  rep.tables.push_back(std::move(t));
}

void run_kpz(const ExperimentConfig& c, int threads, ExperimentReport& rep) {
  const int n = c.n_list.front();
  const int hi = std::min(kKpzDepthHi, n);
  if (hi <= kKpzDepthLo + 1) throw ConfigError(0, "n_list", "kpz needs a depth of at least 10");
  if (c.beta > 1.0) throw ConfigError(0, "beta", "kpz needs an atomless measure (beta <= 1)");
  if (!(c.alpha < 1.0)) throw ConfigError(0, "alpha", "the dual index must lie in (0, 1)");
  const auto replicas = static_cast<std::size_t>(c.replicas);
  std::vector<DimensionEstimate> mu(replicas), nu(replicas);
  std::vector<char> flagged(replicas, 0);
  parallel_for(replicas, threads, [&](std::size_t r) {
    const LeafEnsemble ens(cascade_spec(c, n, static_cast<std::uint32_t>(r)));
    const DyadicMeasure m = build_measure(ens, c.beta);
    mu[r] = measure_dimension(cantor_set(), m, kKpzDepthLo, hi);
    try {
      nu[r] = measure_dimension(cantor_set(), subordinate(m, c.alpha, c.seed, static_cast<std::uint32_t>(r)).cells,
                                kKpzDepthLo, hi);
    } catch (const Error& e) {
      if (e.code() != Errc::atomic_measure) throw;
      flagged[r] = 1;
    }
  });
  rep.streams.push_back({"cascade", 0, static_cast<std::uint32_t>(replicas)});
  rep.streams.push_back({"subordinator", 0, static_cast<std::uint32_t>(replicas)});
  const SpectralModel model = measure_model(SpectralModel::gaussian_critical(), c.beta);
  const double zeta = kpz_solve(model, kCantorDimension);
  const double zeta_alpha = c.alpha * zeta;
  std::vector<double> z, za;
  Table t{"replicas", {"replica", "zeta_hat", "zeta_se", "zeta_alpha_hat", "zeta_alpha_se"}, {}};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t r = 0; r < replicas; ++r) {
    z.push_back(mu[r].zeta_hat);
    if (!flagged[r]) za.push_back(nu[r].zeta_hat);
    t.rows.push_back({double(r), mu[r].zeta_hat, mu[r].std_error, flagged[r] ? nan : nu[r].zeta_hat,
                      flagged[r] ? nan : nu[r].std_error});
  }
  const auto [zm, zse] = mean_and_se(z);
  rep.statistics.emplace_back("zeta0", kCantorDimension);
  rep.statistics.emplace_back("zeta0_box_hat", box_dimension(cantor_set(), kKpzDepthLo, hi).zeta_hat);
  rep.statistics.emplace_back("zeta_theory", zeta);
  rep.statistics.emplace_back("zeta_hat_mean", zm);
  rep.statistics.emplace_back("zeta_hat_se", zse);
  rep.statistics.emplace_back("zeta_alpha_theory", zeta_alpha);
  rep.statistics.emplace_back("atomic_flagged", static_cast<double>(replicas - za.size()));
  rep.checks.push_back(make_check("zeta_hat_minus_theory", zm - zeta, -0.05, 0.05));
  if (!za.empty()) {
    const auto [am, ase] = mean_and_se(za);
    rep.statistics.emplace_back("zeta_alpha_hat_mean", am);
    rep.statistics.emplace_back("zeta_alpha_hat_se", ase);
    rep.checks.push_back(make_check("zeta_alpha_hat_minus_theory", am - zeta_alpha, -0.05, 0.05));
  } else {
    rep.checks.push_back(make_check("zeta_alpha_replicas", 0.0, 1.0, double(replicas)));
  }
  Table sums{"cover_sums", {"depth", "log_cover_sum", "s"}, {}};
  for (const auto& [d, v] : mu.front().cover_sums) sums.rows.push_back({double(d), v, mu.front().zeta_hat});
  rep.tables.push_back(std::move(t));
  rep.tables.push_back(std::move(sums));
}

SpectrumEstimate mean_spectrum(const std::vector<double>& q, const std::vector<std::vector<double>>& per_replica,
                               int level) {
  SpectrumEstimate est;
  est.level = level;
  est.q_grid = q;
  est.tau_hat.assign(q.size(), 0.0);
  for (const auto& t : per_replica) {
    for (std::size_t i = 0; i < q.size(); ++i) est.tau_hat[i] += t[i];
  }
  for (double& v : est.tau_hat) v /= static_cast<double>(per_replica.size());
  return legendre_spectrum(est);
}

void run_spectrum(const ExperimentConfig& c, int threads, ExperimentReport& rep) {
  const int n = c.n_list.front();
  if (!(c.alpha < 1.0)) throw ConfigError(0, "alpha", "the subordinator index must lie in (0, 1)");
  const std::vector<double> q_mu = q_grid(-2.0, 4.0);
  const std::vector<double> q_nu = q_grid(0.0, 4.0);
  const auto replicas = static_cast<std::size_t>(c.replicas);
  std::vector<std::vector<double>> tau_mu(replicas), tau_nu(replicas);
  std::vector<double> excluded_nu(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    const LeafEnsemble ens(cascade_spec(c, n, static_cast<std::uint32_t>(r)));
    const DyadicMeasure m = build_measure(ens, c.beta);
    tau_mu[r] = structure_function(m, q_mu).tau_hat;
    const SpectrumEstimate e =
        structure_function(subordinate(m, c.alpha, c.seed, static_cast<std::uint32_t>(r)).cells, q_nu);
    tau_nu[r] = e.tau_hat;
    excluded_nu[r] = static_cast<double>(e.excluded_cells);
  });
  rep.streams.push_back({"cascade", 0, static_cast<std::uint32_t>(replicas)});
  rep.streams.push_back({"subordinator", 0, static_cast<std::uint32_t>(replicas)});
  const SpectrumEstimate mu = mean_spectrum(q_mu, tau_mu, n);
  const SpectrumEstimate nu = mean_spectrum(q_nu, tau_nu, n);
  const SpectralModel model = measure_model(SpectralModel::gaussian_critical(), c.beta);

  Table tau_t{"tau", {"q", "tau_hat", "tau_theory"}, {}};
  for (std::size_t i = 0; i < q_mu.size(); ++i) tau_t.rows.push_back({q_mu[i], mu.tau_hat[i], lq_exponent(model, q_mu[i])});
  Table leg{"legendre", {"gamma", "f_hat"}, {}};
  for (const auto& [g, f] : mu.legendre) leg.rows.push_back({g, f});
  Table tau_nu_t{"tau_nu", {"q", "tau_hat"}, {}};
  for (std::size_t i = 0; i < q_nu.size(); ++i) tau_nu_t.rows.push_back({q_nu[i], nu.tau_hat[i]});
  Table leg_nu{"legendre_nu", {"gamma", "f_hat"}, {}};
  for (const auto& [g, f] : nu.legendre) leg_nu.rows.push_back({g, f});

  double apex = -std::numeric_limits<double>::infinity();
  for (const auto& [g, f] : mu.legendre) apex = std::max(apex, f);
  rep.statistics.emplace_back("f_apex", apex);
  rep.statistics.emplace_back("majorant_applied", mu.majorant_applied ? 1.0 : 0.0);
  rep.statistics.emplace_back("nu_excluded_cells_mean", mean_and_se(excluded_nu).first);
  if (c.beta <= 1.0) {
    for (double q : {0.5, 1.5, 2.0}) {
      const auto i = static_cast<std::size_t>(std::lround((q + 2.0) / kSpectrumStep));
      const double theory = lq_exponent(model, q);
      char name[32];
      std::snprintf(name, sizeof name, "tau_hat_q%g", q);
      rep.statistics.emplace_back(name, mu.tau_hat[i]);
      std::snprintf(name, sizeof name, "tau_theory_q%g", q);
      rep.statistics.emplace_back(name, theory);
      std::snprintf(name, sizeof name, "tau_q%g_minus_theory", q);
      rep.checks.push_back(make_check(name, mu.tau_hat[i] - theory, -0.05, 0.05));
    }
    rep.checks.push_back(make_check("f_apex", apex, 0.95, 1.05));
  }
  if (c.beta < 1.0) {
    // Below τ'(1)/α the spectrum of ν is linear with slope α.
    const double kink = (tau(model, 1.0 + 1e-6) - tau(model, 1.0 - 1e-6)) / 2e-6 / c.alpha;
    const double top = std::min(0.3, kink);
    std::vector<double> g, f;
    for (int i = 0; i <= 10; ++i) {
      g.push_back(top * i / 10.0);
      f.push_back(legendre_value(nu, g.back()));
    }
    const LinearFit fit = linear_fit(g, f);
    rep.statistics.emplace_back("nu_linear_range_hi", top);
    rep.statistics.emplace_back("nu_legendre_slope", fit.slope);
    rep.checks.push_back(make_check("nu_legendre_slope_minus_alpha", fit.slope - c.alpha, -0.05, 0.05));
  }
  rep.tables.push_back(std::move(tau_t));
  rep.tables.push_back(std::move(leg));
  rep.tables.push_back(std::move(tau_nu_t));
  rep.tables.push_back(std::move(leg_nu));
}

void run_levy_compose(const ExperimentConfig& c, int threads, ExperimentReport& rep) {
  Table t{"composition", {"n", "replica", "total", "top1_share", "topk_share", "cantor_cover_share"}, {}};
  double last_median = 0.0;
  for (std::size_t k = 0; k < c.n_list.size(); ++k) {
    const int n = c.n_list[k];
    const int cover_depth = std::min(n, 12);
    std::vector<DyadicInterval> cover;
    for (std::uint64_t i : cover_indices(cantor_set(), cover_depth)) cover.push_back({cover_depth, i});
    const std::uint32_t first = replica_offset(k, c.replicas);
    const auto replicas = static_cast<std::size_t>(c.replicas);
    std::vector<std::array<double, 4>> rows(replicas);
    const bool report_atoms = k + 1 == c.n_list.size();
    json atoms_doc;
    parallel_for(replicas, threads, [&](std::size_t r) {
      const auto rep_index = first + static_cast<std::uint32_t>(r);
      const LeafEnsemble ens(cascade_spec(c, n, rep_index));
      const AtomicMeasure am = subordinate(build_measure(ens, c.beta), c.alpha, c.seed, rep_index);
      const double total = am.total();
      const auto top = largest_atoms(am, static_cast<std::size_t>(c.top_atoms));
      double topk = 0.0;
      for (const Atom& a : top) topk += a.mass;
      rows[r] = {total, top.empty() ? 0.0 : top.front().mass / total, topk / total, cover_mass(am.cells, cover) / total};
      if (report_atoms && r == 0) {
        json list = json::array();
        for (const Atom& a : top) list.push_back({{"loc", a.location}, {"mass", a.mass}});
        atoms_doc = {{"alpha", c.alpha}, {"beta", c.beta}, {"n", n}, {"atoms", list}, {"total", total}};
      }
    });
    rep.streams.push_back({"cascade", first, static_cast<std::uint32_t>(replicas)});
    rep.streams.push_back({"subordinator", first, static_cast<std::uint32_t>(replicas)});
    std::vector<double> top1, topk, cantor;
    for (std::size_t r = 0; r < replicas; ++r) {
      t.rows.push_back({double(n), double(r), rows[r][0], rows[r][1], rows[r][2], rows[r][3]});
      top1.push_back(rows[r][1]);
      topk.push_back(rows[r][2]);
      cantor.push_back(rows[r][3]);
    }
    last_median = median(topk);
    rep.statistics.emplace_back("median_top1_share" + level_tag(n), median(top1));
    rep.statistics.emplace_back("median_topk_share" + level_tag(n), last_median);
    rep.statistics.emplace_back("mean_cantor_cover_share" + level_tag(n), mean_and_se(cantor).first);
    if (report_atoms) rep.documents.emplace_back("atoms", std::move(atoms_doc));
  }
  rep.checks.push_back(make_check("median_topk_share", last_median, 0.5, 1.0));
  rep.tables.push_back(std::move(t));
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = experiment_name(c.experiment);
  j["beta"] = c.beta;
  if (std::isinf(c.alpha)) {
    j["alpha"] = "inf";
  } else {
    j["alpha"] = c.alpha;
  }
  j["n_list"] = c.n_list;
  j["replicas"] = c.replicas;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.generic_string();
  if (c.threads == 0) {
    j["threads"] = "auto";
  } else {
    j["threads"] = c.threads;
  }
  j["iterations"] = c.iterations;
  j["dx"] = c.dx;
  j["gamma"] = c.gamma;
  j["top_atoms"] = c.top_atoms;
  j["memory_budget_mb"] = c.memory_budget_mb;
  return j;
}

// Non-finite values have no JSON literal.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

Check make_check(std::string name, double value, double lo, double hi) {
  return {std::move(name), value, lo, hi, value >= lo && value <= hi};
}

bool ExperimentReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

double ExperimentReport::statistic(const std::string& name) const {
  for (const auto& [k, v] : statistics) {
    if (k == name) return v;
  }
  throw Error(Errc::domain, "no statistic named " + name);
}

nlohmann::ordered_json ExperimentReport::to_json() const {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["experiment"] = experiment_name(config.experiment);
  j["seed"] = config.seed;
  j["config"] = config_json(config);
  json stats = json::object();
  for (const auto& [k, v] : statistics) stats[k] = number(v);
  j["statistics"] = stats;
  json checks_j = json::array();
  for (const Check& c : checks) {
    checks_j.push_back({{"name", c.name}, {"value", number(c.value)}, {"lo", number(c.lo)}, {"hi", number(c.hi)},
                        {"passed", c.passed}});
  }
  j["checks"] = checks_j;
  j["passed"] = passed();
  json tables_j = json::array();
  for (const Table& t : tables) {
    tables_j.push_back({{"name", t.name}, {"file", t.name + ".csv"}, {"columns", t.columns}, {"rows", t.rows.size()}});
  }
  j["tables"] = tables_j;
  json docs = json::array();
  for (const auto& [name, doc] : documents) docs.push_back(name + ".json");
  j["documents"] = docs;
  json streams_j = json::array();
  for (const StreamUse& s : streams) {
    streams_j.push_back({{"stream", s.stream}, {"first_replica", s.first_replica}, {"replica_count", s.replica_count}});
  }
  j["audit"] = {{"rng", "philox4x32-10"},
                {"threads", threads_used},
                {"streams", streams_j},
                {"wall_clock_seconds", wall_clock_seconds}};
  return j;
}

void validate_report(const nlohmann::ordered_json& report) {
  if (!report.is_object()) throw Error(Errc::config, "report is not a JSON object");
  if (!report.contains("schema_version") || !report["schema_version"].is_number_integer()) {
    throw Error(Errc::config, "report has no schema_version");
  }
  if (report["schema_version"].get<int>() != kReportSchemaVersion) {
    throw Error(Errc::config, "unsupported report schema version");
  }
  if (!report.contains("seed") || !report["seed"].is_number_unsigned()) {
    throw Error(Errc::config, "report has no seed");
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << csv_field(table.columns[i]);
  out << "\r\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << "\r\n";
  }
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

std::uint64_t estimate_memory_bytes(const ExperimentConfig& c) {
  const auto threads = static_cast<std::uint64_t>(resolve_threads(c.threads));
  const int n = *std::max_element(c.n_list.begin(), c.n_list.end());
  const std::uint64_t cells = std::uint64_t{1} << n;
  const auto replicas = static_cast<std::uint64_t>(c.replicas);
  const std::uint64_t blocks = std::uint64_t{1} << std::min(n, kBlockLevels);
  switch (c.experiment) {
    case Experiment::normalization:
    case Experiment::tail:
      // Leaves stream through two block buffers per worker; totals are kept.
      return threads * 2 * blocks * 8 + replicas * c.n_list.size() * 8 * 4;
    case Experiment::wavefront:
      return static_cast<std::uint64_t>(std::ceil(80.0 / c.dx) + 1) * 8 * 8 + static_cast<std::uint64_t>(c.iterations) * 64;
    case Experiment::maxmass:
    case Experiment::modulus:
      // Leaves, masses and one coarsening buffer, plus the critical quantile table.
      return threads * cells * 8 * 3 + replicas * c.n_list.size() * 64 +
             (std::uint64_t{8} << kQuantileTableLevels);
    case Experiment::kpz:
    case Experiment::spectrum:
      // Leaves, measure, subordinated cells and atoms, and the coarsening pyramid.
      return threads * cells * 8 * 9 + replicas * 4096;
    case Experiment::levy_compose:
      return threads * cells * 8 * 7 + replicas * 64;
  }
  return 0;
}

std::uint64_t memory_budget_bytes(const ExperimentConfig& c) {
  if (c.memory_budget_mb > 0) return c.memory_budget_mb * kMiB;
  const long pages = sysconf(_SC_PHYS_PAGES);
  const long page = sysconf(_SC_PAGE_SIZE);
  if (pages <= 0 || page <= 0) return std::uint64_t{4096} * kMiB;
  return static_cast<std::uint64_t>(pages) * static_cast<std::uint64_t>(page) / 2;
}

ExperimentReport compute_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::uint64_t need = estimate_memory_bytes(config);
  const std::uint64_t budget = memory_budget_bytes(config);
  if (need > budget) {
    throw Error(Errc::resource, "experiment needs about " + std::to_string(need / kMiB) + " MiB, budget is " +
                                    std::to_string(budget / kMiB) + " MiB");
  }
  ExperimentReport rep;
  rep.config = config;
  rep.threads_used = resolve_threads(config.threads);
  const auto t0 = std::chrono::steady_clock::now();
  switch (config.experiment) {
    case Experiment::normalization:
      run_normalization(config, rep.threads_used, rep);
      break;
    case Experiment::maxmass:
      run_maxmass(config, rep.threads_used, rep);
      break;
    case Experiment::modulus:
      run_modulus(config, rep.threads_used, rep);
      break;
    case Experiment::tail:
      run_tail(config, rep.threads_used, rep);
      break;
    case Experiment::wavefront:
      run_wavefront(config, rep);
      break;
    case Experiment::kpz:
      run_kpz(config, rep.threads_used, rep);
      break;
    case Experiment::spectrum:
      run_spectrum(config, rep.threads_used, rep);
      break;
    case Experiment::levy_compose:
      run_levy_compose(config, rep.threads_used, rep);
      break;
  }
  rep.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());
  for (const Table& t : report.tables) write_csv(dir / (t.name + ".csv"), t);
  for (const auto& [name, doc] : report.documents) {
    std::ofstream out(dir / (name + ".json"), std::ios::binary);
    out << doc.dump(2) << '\n';
    if (!out) throw Error(Errc::io, "write failed for " + name + ".json");
  }
  const json j = report.to_json();
  validate_report(j);
  std::ofstream out(dir / "report.json", std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw Error(Errc::io, "write failed for report.json");
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  const std::filesystem::path dir = config.output_dir / experiment_name(config.experiment);
  // Fail on an unwritable directory before spending compute.
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());
  ExperimentReport rep = compute_experiment(config);
  write_report(rep, dir);
  return rep;
}

}  // namespace cascadelab
