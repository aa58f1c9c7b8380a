#include "cascadelab/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cascadelab/cascade.hpp"
#include "cascadelab/error.hpp"
#include "cascadelab/estimators.hpp"
#include "cascadelab/harness.hpp"
#include "cascadelab/levy.hpp"
#include "cascadelab/parallel.hpp"
#include "cascadelab/rng.hpp"
#include "cascadelab/spectral.hpp"
#include "cascadelab/wave.hpp"

namespace cascadelab {

namespace {

using Clock = std::chrono::steady_clock;

struct Context {
  VerifyProfile profile;
  VerifyOptions opt;
  bool full() const { return profile == VerifyProfile::full; }
  int threads() const { return resolve_threads(opt.threads); }
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Appends "; " between clauses.
void add(std::string& detail, const std::string& clause) {
  if (!detail.empty()) detail += "; ";
  detail += clause;
}

CascadeSpec spec_for(const Context& ctx, int n, std::uint32_t first_replica) {
  CascadeSpec s;
  s.level_n = n;
  s.seed = ctx.opt.seed;
  s.replica = first_replica;
  return s;
}

ExperimentConfig config_for(const Context& ctx, Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  c.seed = ctx.opt.seed;
  c.threads = ctx.opt.threads;
  c.output_dir = ctx.opt.scratch_dir;
  return c;
}

std::string check_detail(const ExperimentReport& rep) {
  std::string d;
  for (const Check& c : rep.checks) add(d, c.name + fmt("=%.4g", c.value) + (c.passed ? "" : " (out of range)"));
  return d;
}

CriterionResult a1(const Context&) {
  const auto t0 = Clock::now();
  const SpectralModel m = SpectralModel::gaussian_critical();
  double worst = 0.0;
  auto track = [&](double got, double want) {
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
  };
  for (int i = 0; i < 100; ++i) {
    const double u = i / 99.0;
    const double s = -2.0 + 5.0 * u;
    track(phi(m, s), 2.0 * s - s * s);
    const double b = 0.01 + 1.99 * u;
    track(phi_tilde(m, b), (1.0 - b) * (1.0 - b));
    const double bq = 0.05 + 0.9 * u;
    track(q_beta(m, bq), 1.0 / (bq * bq));
    const double g = -2.0 + 8.0 * u;
    track(tau_star(m, g).value, g - g * g / 4.0);
    track(kpz_solve(m, u), 1.0 - std::sqrt(1.0 - u));
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {"A1", worst <= 1e-10 && secs < 1.0, fmt("max relative error %.2e over 5x100 points in %.3f s", worst, secs)};
}

CriterionResult a2(const Context& ctx) {
  const int lo = ctx.full() ? 16 : 12;
  const int hi = ctx.full() ? 22 : 20;
  const int reps = ctx.full() ? 10000 : 3000;
  const double beta[1] = {1.0};
  const auto a = sample_log_partition(spec_for(ctx, lo, 0), beta, reps, ctx.opt.threads)[0];
  const auto b = sample_log_partition(spec_for(ctx, hi, static_cast<std::uint32_t>(reps)), beta, reps, ctx.opt.threads)[0];
  auto ks_with = [&](double exponent) {
    std::vector<double> x(a), y(b);
    for (double& v : x) v = std::exp(v + exponent * std::log(lo));
    for (double& v : y) v = std::exp(v + exponent * std::log(hi));
    return ks_distance(x, y);
  };
  const double crit = ks_critical_value(a.size(), b.size());
  const double d = ks_with(ctx.opt.critical_exponent);
  const double mutant = ks_with(1.0 / 3.0);
  const bool pass = d < crit && mutant >= crit;
  std::string detail = fmt("KS(n=%g vs %g)", lo, hi) + fmt(" = %.4f, critical %.4f", d, crit);
  add(detail, fmt("exponent 1/3 mutant KS = %.4f, ", mutant) + (mutant >= crit ? "rejected" : "NOT rejected"));
  return {"A2", pass, detail};
}

CriterionResult a3(const Context& ctx) {
  const int n = ctx.full() ? 18 : 14;
  const int reps = ctx.full() ? 10000 : 2000;
  const std::vector<double> betas{0.3, 0.5, 0.7};
  const auto logs = sample_log_partition(spec_for(ctx, n, 0), betas, reps, ctx.opt.threads);
  const SpectralModel m = SpectralModel::gaussian_critical();
  bool pass = true;
  std::string detail;
  for (std::size_t k = 0; k < betas.size(); ++k) {
    const double shift = log_normalization(m, n, betas[k]);
    double s = 0.0, ss = 0.0;
    for (double v : logs[k]) {
      const double z = std::exp(v + shift);
      s += z;
      ss += z * z;
    }
    const double mean = s / reps;
    const double se = std::sqrt((ss / reps - mean * mean) / (reps - 1.0));
    const double score = (mean - 1.0) / se;
    pass = pass && std::abs(score) <= 3.0;
    add(detail, fmt("beta %.1f: mean %.4f (%+.2f SE)", betas[k], mean, score));
  }
  return {"A3", pass, detail};
}

CriterionResult a4(const Context& ctx) {
  ExperimentConfig c = config_for(ctx, Experiment::tail);
  c.n_list = {ctx.full() ? 20 : 16};
  c.replicas = ctx.full() ? 100000 : 20000;
  const ExperimentReport rep = compute_experiment(c);
  const double idx = rep.statistic("index_hat");
  // Synthetic Pareto(1) control.
  PhiloxEngine rng(StreamKey{ctx.opt.seed, 0, Stream::synthetic});
  std::vector<double> pareto(100000);
  for (double& x : pareto) x = 1.0 / rng.uniform_positive();
  const double control = hill_index(pareto, kHillFraction);
  const bool pass = idx >= 0.85 && idx <= 1.15 && control >= 0.95 && control <= 1.05;
  std::string detail = fmt("Hill index %.4f at n=%g", idx, c.n_list.front()) + fmt(" over %g replicas", c.replicas);
  add(detail, fmt("plateau %.4f", rep.statistic("plateau_hat")));
  add(detail, fmt("Pareto(1) control %.4f", control));
  return {"A4", pass, detail};
}

CriterionResult a5(const Context& ctx) {
  ExperimentConfig c = config_for(ctx, Experiment::maxmass);
  c.n_list = ctx.full() ? std::vector<int>{12, 14, 16, 18, 20, 22} : std::vector<int>{12, 14, 16, 18, 20};
  c.replicas = 500;
  const ExperimentReport rep = compute_experiment(c);
  std::string detail;
  for (int n : c.n_list) add(detail, fmt("n=%g median %.4g", n, rep.statistic("median_n" + std::to_string(n))));
  add(detail, check_detail(rep));
  return {"A5", rep.passed(), detail};
}

CriterionResult a6(const Context& ctx) {
  ExperimentConfig c = config_for(ctx, Experiment::wavefront);
  c.alpha = 0.5;
  c.iterations = 60;
  c.dx = 0.02;
  const ExperimentReport rep = compute_experiment(c);
  const WaveProfile g1 = step_in_place(init_profile(kInfiniteAlpha, Grid{}));
  double worst = 0.0;
  for (std::size_t i = 0; i < g1.values.size(); ++i) {
    worst = std::max(worst, std::abs(g1.values[i] - 0.5 * std::erfc(-g1.x_at(i) / std::sqrt(2.0))));
  }
  const bool pass = rep.passed() && worst < 1e-6;
  std::string detail = fmt("speed %.7f vs c(0.5) %.7f", rep.statistic("speed"), rep.statistic("c_alpha"));
  add(detail, fmt("Heaviside step vs normal cdf max error %.2e", worst));
  return {"A6", pass, detail};
}

CriterionResult a7(const Context&) {
  const FrontTrace heav = run_front_tracking(kInfiniteAlpha, 200);
  const FrontTrace crit = run_front_tracking(kLambda, 200);
  const LeastSquaresFit& h = *heav.fitted;
  const LeastSquaresFit& k = *crit.fitted;
  const double h_target = -3.0 / (2.0 * kLambda);
  const double k_target = -1.0 / (2.0 * kLambda);
  const bool disjoint = h.log_ci_high < k.log_ci_low || k.log_ci_high < h.log_ci_low;
  const bool pass = std::abs(h.log - h_target) <= 0.15 && std::abs(k.log - k_target) <= 0.15 && disjoint;
  std::string detail = fmt("alpha=inf log coefficient %.4f [%.4f, %.4f]", h.log, h.log_ci_low, h.log_ci_high);
  add(detail, fmt("alpha=sqrt(2 ln 2) %.4f [%.4f, %.4f]", k.log, k.log_ci_low, k.log_ci_high));
  add(detail, disjoint ? "intervals disjoint" : "intervals overlap");
  return {"A7", pass, detail};
}

CriterionResult a8(const Context& ctx) {
  const int draws = ctx.full() ? 100000 : 20000;
  bool pass = true;
  double worst = 0.0;
  for (double alpha : {0.3, 0.5, 0.8}) {
    PhiloxEngine rng(StreamKey{ctx.opt.seed, static_cast<std::uint32_t>(alpha * 10), Stream::synthetic});
    std::vector<double> x(static_cast<std::size_t>(draws));
    for (double& v : x) v = sample_stable_increment(alpha, 1.0, rng);
    for (double u : {0.5, 1.0, 2.0}) {
      double s = 0.0, ss = 0.0;
      for (double v : x) {
        const double e = std::exp(-u * v);
        s += e;
        ss += e * e;
      }
      const double mean = s / draws;
      const double se = std::sqrt((ss / draws - mean * mean) / (draws - 1.0));
      const double score = std::abs(mean - std::exp(-std::pow(u, alpha))) / se;
      worst = std::max(worst, score);
      pass = pass && score <= 3.0;
    }
  }
  PhiloxEngine rng(StreamKey{ctx.opt.seed, 100, Stream::synthetic});
  std::vector<double> x(static_cast<std::size_t>(draws));
  for (double& v : x) v = sample_stable_increment(0.5, 1.0, rng);
  const double d = ks_distance(x, [](double t) { return t <= 0.0 ? 0.0 : std::erfc(1.0 / (2.0 * std::sqrt(t))); });
  const double crit = ks_critical_value(x.size(), 0);
  pass = pass && d < crit;
  std::string detail = fmt("worst Laplace deviation %.2f SE over 9 cases, %g draws", worst, draws);
  add(detail, fmt("alpha=1/2 KS %.4f vs critical %.4f", d, crit));
  return {"A8", pass, detail};
}

CriterionResult a9(const Context& ctx) {
  ExperimentConfig c = config_for(ctx, Experiment::kpz);
  // Regression depths stay at 8..18; the extra levels refine each cover cell.
  c.n_list = {20};
  c.replicas = 50;
  c.beta = 1.0;
  c.alpha = 0.5;
  const ExperimentReport rep = compute_experiment(c);
  std::string detail = fmt("zeta_hat %.4f vs %.4f", rep.statistic("zeta_hat_mean"), rep.statistic("zeta_theory"));
  if (rep.statistic("atomic_flagged") < c.replicas) {
    add(detail, fmt("dual %.4f vs %.4f", rep.statistic("zeta_alpha_hat_mean"), rep.statistic("zeta_alpha_theory")));
  }
  add(detail, fmt("%g replicas, %g flagged atomic", c.replicas, rep.statistic("atomic_flagged")));
  return {"A9", rep.passed(), detail};
}

CriterionResult a10(const Context& ctx) {
  ExperimentConfig c = config_for(ctx, Experiment::spectrum);
  c.n_list = {ctx.full() ? 20 : 18};
  c.replicas = ctx.full() ? 20 : 10;
  c.alpha = 0.5;
  c.beta = 1.0;
  const ExperimentReport crit = compute_experiment(c);
  c.beta = 0.5;
  const ExperimentReport sub = compute_experiment(c);
  bool pass = true;
  std::string detail;
  for (const Check& k : crit.checks) {
    pass = pass && k.passed;
    add(detail, k.name + fmt("=%+.4f", k.value) + (k.passed ? "" : " FAIL"));
  }
  for (const Check& k : sub.checks) {
    if (k.name != "nu_legendre_slope_minus_alpha") continue;
    pass = pass && k.passed;
    add(detail, fmt("nu_alpha Legendre slope %.4f vs 0.5", sub.statistic("nu_legendre_slope")) + (k.passed ? "" : " FAIL"));
  }
  return {"A10", pass, detail};
}

CriterionResult a11(const Context& ctx) {
  const int n = 10;
  const int reps = ctx.full() ? 10000 : 2000;
  const std::vector<double> betas{0.5, 1.0, 2.0};
  // Depth-n pairs use replicas [0, 2R), depth n+1 uses [2R, 3R).
  const auto parts = sample_log_partition(spec_for(ctx, n, 0), betas, 2 * reps, ctx.opt.threads);
  const auto whole =
      sample_log_partition(spec_for(ctx, n + 1, static_cast<std::uint32_t>(2 * reps)), betas, reps, ctx.opt.threads);
  const SpectralModel m = SpectralModel::gaussian_critical();
  const double crit = ks_critical_value(static_cast<std::size_t>(reps), static_cast<std::size_t>(reps));
  bool pass = true;
  std::string detail;
  for (std::size_t k = 0; k < betas.size(); ++k) {
    std::vector<double> composed(static_cast<std::size_t>(reps));
    for (std::size_t r = 0; r < composed.size(); ++r) {
      composed[r] = compose_log_partition(m, betas[k], ctx.opt.seed, r, parts[k][2 * r], parts[k][2 * r + 1]);
    }
    const double d = ks_distance(composed, whole[k]);
    pass = pass && d < crit;
    add(detail, fmt("beta %.1f KS %.4f", betas[k], d));
  }
  add(detail, fmt("critical %.4f", crit));
  return {"A11", pass, detail};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Report JSON minus wall-clock time, plus every CSV, byte for byte.
std::string fingerprint(const std::filesystem::path& dir) {
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(read_file(dir / "report.json"));
  validate_report(j);
  j["audit"].erase("wall_clock_seconds");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().filename() != "report.json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string out = j.dump();
  for (const auto& f : files) out += "\n--" + f.filename().string() + "\n" + read_file(f);
  return out;
}

CriterionResult a12(const Context& ctx) {
  std::vector<ExperimentConfig> configs;
  ExperimentConfig tail = config_for(ctx, Experiment::tail);
  tail.n_list = {10};
  tail.replicas = 2000;
  configs.push_back(tail);
  ExperimentConfig spectrum = config_for(ctx, Experiment::spectrum);
  spectrum.n_list = {10};
  spectrum.replicas = 4;
  configs.push_back(spectrum);
  ExperimentConfig compose = config_for(ctx, Experiment::levy_compose);
  compose.n_list = {8, 10};
  compose.replicas = 4;
  configs.push_back(compose);
  bool pass = true;
  std::string detail;
  for (ExperimentConfig c : configs) {
    std::string prints[2];
    for (int run = 0; run < 2; ++run) {
      // Same directory both times: the config echo includes output_dir.
      c.output_dir = ctx.opt.scratch_dir / "determinism";
      c.threads = std::max(3, ctx.threads());
      std::filesystem::remove_all(c.output_dir / experiment_name(c.experiment));
      run_experiment(c);
      prints[run] = fingerprint(c.output_dir / experiment_name(c.experiment));
    }
    const bool same = prints[0] == prints[1];
    pass = pass && same;
    add(detail, std::string(experiment_name(c.experiment)) + (same ? " identical" : " DIFFERS"));
  }
  add(detail, fmt("%g threads", std::max(3, ctx.threads())));
  return {"A12", pass, detail};
}

using Runner = CriterionResult (*)(const Context&);

const std::vector<std::pair<std::string, Runner>>& runners() {
  static const std::vector<std::pair<std::string, Runner>> r{
      {"A1", a1}, {"A2", a2}, {"A3", a3},   {"A4", a4},   {"A5", a5},   {"A6", a6},
      {"A7", a7}, {"A8", a8}, {"A9", a9}, {"A10", a10}, {"A11", a11}, {"A12", a12}};
  return r;
}

}  // namespace

const std::vector<std::string>& criterion_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& [id, fn] : runners()) v.push_back(id);
    return v;
  }();
  return ids;
}

bool VerifySummary::all_passed() const {
  return !results.empty() && std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

std::string format_result(const CriterionResult& r, bool with_time) {
  char head[64];
  std::snprintf(head, sizeof head, "%-4s %s  ", r.id.c_str(), r.passed ? "PASS" : "FAIL");
  std::string out = head + r.detail;
  if (with_time) out += fmt(" [%.1f s]", r.seconds);
  return out;
}

std::string VerifySummary::matrix() const {
  std::string out;
  for (const auto& r : results) out += format_result(r) + "\n";
  return out;
}

VerifySummary verify_all(VerifyProfile profile, const VerifyOptions& options,
                         const std::function<void(const CriterionResult&)>& on_result) {
  for (const auto& id : options.only) {
    const auto& ids = criterion_ids();
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) throw Error(Errc::domain, "unknown criterion " + id);
  }
  const Context ctx{profile, options};
  VerifySummary summary;
  summary.profile = profile;
  for (const auto& [id, fn] : runners()) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end()) {
      continue;
    }
    const auto t0 = Clock::now();
    CriterionResult r;
    try {
      r = fn(ctx);
    } catch (const std::exception& e) {
      r = {id, false, std::string("error: ") + e.what()};
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (on_result) on_result(r);
    summary.results.push_back(std::move(r));
  }
  return summary;
}

}  // namespace cascadelab
