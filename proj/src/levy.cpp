#include "cascadelab/levy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cascadelab/detail/sum.hpp"
#include "cascadelab/error.hpp"
#include "cascadelab/parallel.hpp"

namespace cascadelab {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::domain, "stable index must lie in (0, 1)");
}

void check_gap(double gap) {
  if (!(gap >= 0.0) || !std::isfinite(gap)) throw Error(Errc::domain, "subordinator gap must be finite and >= 0");
}

// Uniform in (0, 1), never an endpoint.
double unit_open(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

}  // namespace

// S = (A(θ)/E)^{(1−α)/α}, A(θ) = sin(αθ)^{α/(1−α)} sin((1−α)θ) / sin(θ)^{1/(1−α)},
// θ uniform on (0, π), E standard exponential, has E e^{−uS} = e^{−u^α};
// L_α(s) = s^{1/α} S.
double stable_from_uniforms(double alpha, double gap, double u_angle, double u_exp) {
  check_alpha(alpha);
  check_gap(gap);
  if (gap == 0.0) return 0.0;
  const double theta = std::numbers::pi * u_angle;
  const double e = -std::log(u_exp);
  const double log_a = alpha / (1.0 - alpha) * std::log(std::sin(alpha * theta)) +
                       std::log(std::sin((1.0 - alpha) * theta)) -
                       std::log(std::sin(theta)) / (1.0 - alpha);
  const double log_s = (1.0 - alpha) / alpha * (log_a - std::log(e));
  return std::exp(log_s + std::log(gap) / alpha);
}

double sample_stable_increment(double alpha, double gap, PhiloxEngine& rng) {
  check_alpha(alpha);
  check_gap(gap);
  if (gap == 0.0) return 0.0;
  const double u1 = unit_open(rng());
  const double u2 = unit_open(rng());
  return stable_from_uniforms(alpha, gap, u1, u2);
}

double stable_at(double alpha, double gap, const StreamKey& key, std::uint64_t address) {
  const auto w = key.words(address);
  return stable_from_uniforms(alpha, gap, unit_open(w[0]), unit_open(w[1]));
}

SubordinatorPath sample_subordinator(double alpha, std::span<const double> times, std::uint64_t seed,
                                     std::uint32_t replica) {
  check_alpha(alpha);
  SubordinatorPath path;
  path.alpha = alpha;
  path.times.assign(times.begin(), times.end());
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k]) || times[k] < 0.0 || (k > 0 && times[k] < times[k - 1])) {
      throw Error(Errc::domain, "subordinator times must be finite, nonnegative and nondecreasing");
    }
  }
  const StreamKey key{seed, replica, Stream::subordinator};
  if (times.size() > 1) path.increments.resize(times.size() - 1);
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    path.increments[k] = stable_at(alpha, times[k + 1] - times[k], key, k);
  }
  return path;
}

double AtomicMeasure::total() const { return cells.total() + continuous_remainder; }

AtomicMeasure atoms_from_cells(DyadicMeasure cells, double alpha) {
  cells.validate();
  AtomicMeasure am;
  am.alpha = alpha;
  am.cells = std::move(cells);
  for (std::uint64_t i = 0; i < am.cells.size(); ++i) {
    const double m = am.cells.masses[i];
    if (m > 0.0) am.atoms.push_back({std::ldexp(static_cast<double>(i) + 0.5, -am.cells.level), m, i});
  }
  std::sort(am.atoms.begin(), am.atoms.end(), [](const Atom& a, const Atom& b) {
    return a.mass != b.mass ? a.mass > b.mass : a.cell < b.cell;
  });
  return am;
}

AtomicMeasure subordinate(const DyadicMeasure& measure, double alpha, std::uint64_t seed, std::uint32_t replica) {
  check_alpha(alpha);
  measure.validate();
  DyadicMeasure cells;
  cells.level = measure.level;
  cells.tag = NormalizationTag::raw;
  cells.masses.resize(measure.masses.size());
  const StreamKey key{seed, replica, Stream::subordinator};
  const std::uint64_t base = std::uint64_t{1} << measure.level;
  for (std::uint64_t i = 0; i < measure.size(); ++i) cells.masses[i] = stable_at(alpha, measure.masses[i], key, base + i);
  return atoms_from_cells(std::move(cells), alpha);
}

std::vector<Atom> largest_atoms(const AtomicMeasure& am, std::size_t k) {
  if (k < 1) throw Error(Errc::domain, "k must be at least 1");
  const std::size_t take = std::min(k, am.atoms.size());
  return {am.atoms.begin(), am.atoms.begin() + static_cast<std::ptrdiff_t>(take)};
}

double cover_mass(const DyadicMeasure& measure, std::span<const DyadicInterval> cover) {
  std::vector<double> parts;
  parts.reserve(cover.size());
  for (const DyadicInterval& c : cover) {
    if (c.level < 0 || c.level > measure.level || c.index >> c.level != 0) {
      throw Error(Errc::domain, "cover cell must be a dyadic interval no finer than the measure");
    }
    const int shift = measure.level - c.level;
    const std::uint64_t first = c.index << shift;
    const std::uint64_t count = std::uint64_t{1} << shift;
    parts.push_back(detail::pairwise_sum(std::span<const double>(measure.masses).subspan(first, count)));
  }
  return detail::pairwise_sum(std::span<const double>(parts));
}

double null_set_pushforward_check(double alpha, const DyadicMeasure& measure,
                                  std::span<const DyadicInterval> cover, std::uint64_t seed, int replicas,
                                  int threads) {
  check_alpha(alpha);
  if (replicas < 1) throw Error(Errc::domain, "replicas must be at least 1");
  if (cover.empty()) return 0.0;
  std::vector<double> sums(static_cast<std::size_t>(replicas));
  parallel_for(sums.size(), resolve_threads(threads), [&](std::size_t r) {
    sums[r] = cover_mass(subordinate(measure, alpha, seed, static_cast<std::uint32_t>(r)).cells, cover);
  });
  return detail::pairwise_sum(std::span<const double>(sums)) / static_cast<double>(replicas);
}

}  // namespace cascadelab
