#include "cascadelab/cascade.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>

#include "cascadelab/detail/fastmath.hpp"
#include "cascadelab/detail/sum.hpp"
#include "cascadelab/error.hpp"
#include "cascadelab/parallel.hpp"

namespace cascadelab {

namespace {

constexpr double kExpSafe = 600.0;

// e^{βX} summed over one block, scaled when the exponents get large.
detail::ScaledSum block_exp_sum(std::span<const double> xs, double beta, double* work) {
  const std::size_t n = xs.size();
  const double* x = xs.data();
  double hi = -std::numeric_limits<double>::infinity();
#pragma omp simd reduction(max : hi)
  for (std::size_t i = 0; i < n; ++i) hi = hi > beta * x[i] ? hi : beta * x[i];
  const double shift = (hi > kExpSafe || hi < -kExpSafe) ? hi : 0.0;
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) work[i] = detail::fast_exp(beta * x[i] - shift);
  return {shift, detail::halving_sum(work, n)};
}

std::vector<detail::ScaledSum> exp_sums(const LeafEnsemble& ens, std::span<const double> betas) {
  std::vector<std::vector<detail::ScaledSum>> parts(betas.size());
  std::vector<double> work(ens.block_size());
  ens.for_each_block([&](std::uint64_t, std::span<const double> xs) {
    for (std::size_t b = 0; b < betas.size(); ++b) {
      parts[b].push_back(block_exp_sum(xs, betas[b], work.data()));
    }
  });
  std::vector<detail::ScaledSum> out;
  out.reserve(betas.size());
  for (auto& p : parts) out.push_back(detail::combine_all(std::move(p)));
  return out;
}

void require_positive_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(Errc::domain, "beta must be > 0");
}

DyadicMeasure exp_measure(const LeafEnsemble& ens, double beta, double log_scale,
                          NormalizationTag tag) {
  DyadicMeasure m;
  m.level = ens.level();
  m.tag = tag;
  m.masses.resize(ens.size());
  double* out = m.masses.data();
  ens.for_each_block([&](std::uint64_t first, std::span<const double> xs) {
    double* o = out + first;
    const double* x = xs.data();
    const std::size_t n = xs.size();
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) o[i] = detail::fast_exp(beta * x[i] + log_scale);
  });
  return m;
}

void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void CascadeSpec::validate() const {
  if (level_cap < 1 || level_cap > 40) throw Error(Errc::domain, "level cap must be in [1, 40]");
  if (level_n > level_cap) {
    throw Error(Errc::cap_exceeded, "level_n " + std::to_string(level_n) + " exceeds cap " +
                                        std::to_string(level_cap));
  }
  if (level_n < 1) throw Error(Errc::domain, "level_n must be >= 1");
  require_positive_beta(beta);
}

detail::IncrementLaw detail::increment_law(const SpectralModel& model) {
  return {model.mean(), model.stddev()};
}

LeafEnsemble::LeafEnsemble(const CascadeSpec& spec)
    : spec_(spec),
      law_(detail::increment_law(spec.model)),
      key_{spec.seed, spec.replica, Stream::cascade},
      block_levels_(std::min(spec.level_n, kBlockLevels)) {
  spec_.validate();
}

void LeafEnsemble::generate_block(std::uint64_t b, std::span<double> out,
                                  std::span<double> scratch) const {
  const std::uint64_t bs = block_size();
  if (b >= block_count() || out.size() < bs || scratch.size() < bs) {
    throw Error(Errc::domain, "generate_block: block index or buffer size out of range");
  }
  const int top = spec_.level_n - block_levels_;
  // Ping-pong so that the final level lands in `out`.
  double* bufs[2] = {out.data(), scratch.data()};
  int cur = block_levels_ % 2 == 0 ? 0 : 1;
  bufs[cur][0] = detail::path_sum(law_, key_, top, b);
  std::uint64_t width = 1;
  for (int d = top; d < spec_.level_n; ++d) {
    detail::expand_level(law_, key_, d, b * width, width, bufs[cur], bufs[1 - cur]);
    cur = 1 - cur;
    width *= 2;
  }
}

std::vector<double> LeafEnsemble::materialize() const {
  std::vector<double> all(size());
  for_each_block([&](std::uint64_t first, std::span<const double> xs) {
    std::copy(xs.begin(), xs.end(), all.begin() + static_cast<std::ptrdiff_t>(first));
  });
  return all;
}

LeafEnsemble generate_leaves(const CascadeSpec& spec) { return LeafEnsemble(spec); }

std::vector<double> generate_leaves_naive(const CascadeSpec& spec) {
  spec.validate();
  const auto law = detail::increment_law(spec.model);
  const StreamKey key{spec.seed, spec.replica, Stream::cascade};
  std::vector<double> level{0.0};
  for (int d = 0; d < spec.level_n; ++d) {
    std::vector<double> next(level.size() * 2);
    detail::expand_level(law, key, d, 0, level.size(), level.data(), next.data());
    level.swap(next);
  }
  return level;
}

double log_partition_function(const LeafEnsemble& ens, double beta) {
  require_positive_beta(beta);
  const double b[1] = {beta};
  return exp_sums(ens, b)[0].log();
}

std::vector<double> log_partition_functions(const LeafEnsemble& ens,
                                            std::span<const double> betas) {
  for (double b : betas) require_positive_beta(b);
  std::vector<double> out;
  for (const auto& s : exp_sums(ens, betas)) out.push_back(s.log());
  return out;
}

double partition_function(const LeafEnsemble& ens, double beta) {
  require_positive_beta(beta);
  const double b[1] = {beta};
  const auto s = exp_sums(ens, b)[0];
  const double z = s.shift == 0.0 ? s.sum : std::exp(s.log());
  if (!std::isfinite(z)) throw Error(Errc::overflow, "partition function overflows a double");
  return z;
}

double log_normalization(const SpectralModel& model, int n, double beta) {
  require_positive_beta(beta);
  const double ln = std::log(static_cast<double>(n));
  if (beta < 1.0) return -static_cast<double>(n) * phi_tilde(model, beta) * std::numbers::ln2;
  if (beta == 1.0) return 0.5 * ln;
  return 1.5 * beta * ln;
}

double normalized_statistic(const LeafEnsemble& ens, double theta) {
  if (!(theta >= 1.0) || !std::isfinite(theta)) {
    throw Error(Errc::domain, "normalized_statistic needs theta >= 1");
  }
  const double ln = std::log(static_cast<double>(ens.level()));
  const double scale = theta == 1.0 ? 0.5 * ln : 1.5 * theta * ln;
  const double v = std::exp(log_partition_function(ens, theta) + scale);
  if (!std::isfinite(v)) throw Error(Errc::overflow, "normalized statistic overflows a double");
  return v;
}

const char* tag_name(NormalizationTag tag) noexcept {
  switch (tag) {
    case NormalizationTag::subcritical:
      return "subcritical";
    case NormalizationTag::critical:
      return "critical";
    case NormalizationTag::supercritical:
      return "supercritical";
    case NormalizationTag::raw:
      return "raw";
    case NormalizationTag::uniform_stub:
      return "uniform_stub";
  }
  return "unknown";
}

double DyadicMeasure::total() const { return detail::pairwise_sum(masses); }

std::vector<double> DyadicMeasure::cdf() const {
  std::vector<double> f(masses.size() + 1, 0.0);
  for (std::size_t i = 0; i < masses.size(); ++i) f[i + 1] = f[i] + masses[i];
  return f;
}

DyadicMeasure DyadicMeasure::coarsen(int to_level) const {
  if (to_level < 0 || to_level > level) throw Error(Errc::domain, "coarsen: bad target level");
  DyadicMeasure out{to_level, masses, tag};
  for (int l = level; l > to_level; --l) {
    const std::size_t half = out.masses.size() / 2;
    for (std::size_t i = 0; i < half; ++i) {
      out.masses[i] = out.masses[2 * i] + out.masses[2 * i + 1];
    }
    out.masses.resize(half);
  }
  return out;
}

void DyadicMeasure::validate() const {
  if (level < 0 || level > 40) throw Error(Errc::domain, "measure level out of range");
  if (masses.size() != (std::uint64_t{1} << level)) {
    throw Error(Errc::domain, "measure size is not 2^level");
  }
  for (double m : masses) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw Error(Errc::domain, "measure masses must be finite and nonnegative");
    }
  }
}

DyadicMeasure build_measure(const LeafEnsemble& ens, double beta) {
  require_positive_beta(beta);
  const auto tag = beta < 1.0    ? NormalizationTag::subcritical
                   : beta == 1.0 ? NormalizationTag::critical
                                 : NormalizationTag::supercritical;
  return exp_measure(ens, beta, log_normalization(ens.spec().model, ens.level(), beta), tag);
}

DyadicMeasure raw_measure(const LeafEnsemble& ens, double beta) {
  require_positive_beta(beta);
  return exp_measure(ens, beta, 0.0, NormalizationTag::raw);
}

DyadicMeasure uniform_measure(int level) {
  if (level < 0 || level > kDefaultLevelCap) throw Error(Errc::domain, "uniform level out of range");
  const std::size_t n = std::size_t{1} << level;
  return {level, std::vector<double>(n, std::ldexp(1.0, -level)), NormalizationTag::uniform_stub};
}

DyadicMeasure semistable_measure(const LeafEnsemble& ens, std::span<const double> bank) {
  if (bank.empty()) throw Error(Errc::insufficient_samples, "semistable_measure: empty bank");
  DyadicMeasure m;
  m.level = ens.level();
  m.tag = NormalizationTag::critical;
  m.masses.resize(ens.size());
  const StreamKey pick{ens.spec().seed, ens.spec().replica, Stream::resample};
  const std::uint64_t base = ens.size();
  const auto bank_size = static_cast<unsigned __int128>(bank.size());
  ens.for_each_block([&](std::uint64_t first, std::span<const double> xs) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const std::uint64_t w = pick.words(base + first + i)[0];
      const auto idx = static_cast<std::size_t>((w * bank_size) >> 64);
      m.masses[first + i] = detail::fast_exp(xs[i]) * bank[idx];
    }
  });
  return m;
}

double max_leaf_mass(const DyadicMeasure& measure) {
  if (measure.masses.empty()) throw Error(Errc::domain, "max_leaf_mass of an empty measure");
  return *std::max_element(measure.masses.begin(), measure.masses.end());
}

std::vector<std::vector<double>> sample_log_partition(const CascadeSpec& tmpl,
                                                      std::span<const double> betas,
                                                      int replicas, int threads) {
  if (replicas < 1) throw Error(Errc::domain, "replicas must be >= 1");
  tmpl.validate();
  std::vector<std::vector<double>> per_replica(static_cast<std::size_t>(replicas));
  parallel_for(per_replica.size(), threads, [&](std::size_t r) {
    CascadeSpec s = tmpl;
    s.replica = tmpl.replica + static_cast<std::uint32_t>(r);
    per_replica[r] = log_partition_functions(LeafEnsemble(s), betas);
  });
  std::vector<std::vector<double>> out(betas.size(), std::vector<double>(per_replica.size()));
  for (std::size_t r = 0; r < per_replica.size(); ++r) {
    for (std::size_t b = 0; b < betas.size(); ++b) out[b][r] = per_replica[r][b];
  }
  return out;
}

std::vector<double> sample_total_mass(const CascadeSpec& tmpl, double beta, int replicas,
                                      int threads) {
  const double b[1] = {beta};
  auto logs = sample_log_partition(tmpl, b, replicas, threads)[0];
  const double shift = log_normalization(tmpl.model, tmpl.level_n, beta);
  for (double& v : logs) v = std::exp(v + shift);
  return logs;
}

double compose_log_partition(const SpectralModel& model, double beta, std::uint64_t seed,
                             std::uint64_t index, double log_z0, double log_z1) {
  require_positive_beta(beta);
  double x0;
  double x1;
  detail::increment_pair(detail::increment_law(model), {seed, 0, Stream::composition}, index, x0,
                         x1);
  return detail::log_add_exp(beta * x0 + log_z0, beta * x1 + log_z1);
}

namespace {

template <class Weight>
double dyadic_sweep_max(const DyadicMeasure& measure, Weight weight) {
  std::vector<double> cur = measure.masses;
  double best = 0.0;
  for (int k = measure.level; k >= 1; --k) {
    const double w = weight(k);
    for (double m : cur) best = std::max(best, m * w);
    const std::size_t half = cur.size() / 2;
    for (std::size_t i = 0; i < half; ++i) cur[i] = cur[2 * i] + cur[2 * i + 1];
    cur.resize(half);
  }
  return best;
}

}  // namespace

double modulus_statistic(const DyadicMeasure& measure, double gamma) {
  if (!(gamma > 0.0)) throw Error(Errc::domain, "modulus_statistic needs gamma > 0");
  return dyadic_sweep_max(measure, [&](int k) {
    return std::pow(std::log1p(std::ldexp(1.0, k)), gamma);
  });
}

double submodulus_statistic(const DyadicMeasure& measure, const SpectralModel& model,
                            double beta, double gamma) {
  if (!(beta > 0.0 && beta < 1.0)) throw Error(Errc::domain, "submodulus needs beta in (0,1)");
  if (!(gamma > 0.0 && gamma < 0.5)) throw Error(Errc::domain, "submodulus needs gamma in (0,1/2)");
  const double ft = phi_tilde(model, beta);
  return dyadic_sweep_max(measure, [&](int k) {
    return std::exp2(k * ft) * std::pow(std::log1p(std::ldexp(1.0, k)), gamma * beta);
  });
}

void write_measure(const std::filesystem::path& path, const DyadicMeasure& measure) {
  measure.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
  os.write("CASC", 4);
  put_u32(os, 1);
  put_u32(os, static_cast<std::uint32_t>(measure.level));
  put_u32(os, static_cast<std::uint32_t>(measure.masses.size()));
  for (double m : measure.masses) {
    const auto bits = std::bit_cast<std::uint64_t>(m);
    put_u32(os, static_cast<std::uint32_t>(bits));
    put_u32(os, static_cast<std::uint32_t>(bits >> 32));
  }
  if (!os) throw Error(Errc::io, "write failed for " + path.string());
}

DyadicMeasure read_measure(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::io, "cannot open " + path.string());
  unsigned char header[16];
  if (!is.read(reinterpret_cast<char*>(header), 16) || std::memcmp(header, "CASC", 4) != 0) {
    throw Error(Errc::io, path.string() + " is not a cascade measure dump");
  }
  if (get_u32(header + 4) != 1) throw Error(Errc::io, "unsupported dump version");
  DyadicMeasure m;
  m.level = static_cast<int>(get_u32(header + 8));
  const std::uint32_t count = get_u32(header + 12);
  if (m.level > 40 || count != (std::uint64_t{1} << m.level)) {
    throw Error(Errc::io, "dump header is inconsistent");
  }
  m.masses.resize(count);
  std::vector<unsigned char> raw(static_cast<std::size_t>(count) * 8);
  if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw Error(Errc::io, "dump is truncated");
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t bits = get_u32(&raw[8 * i]) |
                               (static_cast<std::uint64_t>(get_u32(&raw[8 * i + 4])) << 32);
    m.masses[i] = std::bit_cast<double>(bits);
  }
  return m;
}

}  // namespace cascadelab
