#pragma once

// One-sided α-stable subordinator L_α with E e^{−u L_α(s)} = e^{−s u^α},
// and its composition with the distribution function of a dyadic measure.

#include <cstdint>
#include <span>
#include <vector>

#include "cascadelab/cascade.hpp"
#include "cascadelab/dyadic.hpp"
#include "cascadelab/rng.hpp"

namespace cascadelab {

/// L_α(gap) from two uniforms in (0, 1) (Kanter's representation).
double stable_from_uniforms(double alpha, double gap, double u_angle, double u_exp);

/// L_α(gap); gap = 0 gives 0. Throws domain unless 0 < α < 1 and gap ≥ 0.
double sample_stable_increment(double alpha, double gap, PhiloxEngine& rng);

/// L_α(gap) drawn from the subordinator stream at a fixed address.
double stable_at(double alpha, double gap, const StreamKey& key, std::uint64_t address);

struct SubordinatorPath {
  double alpha = 0.5;
  std::vector<double> times;       // nondecreasing evaluation points
  std::vector<double> increments;  // L(times[k+1]) − L(times[k])
};

/// Increments of one path of L_α along `times`; increment k uses address k.
SubordinatorPath sample_subordinator(double alpha, std::span<const double> times, std::uint64_t seed,
                                     std::uint32_t replica = 0);

struct Atom {
  double location = 0.0;  // cell midpoint
  double mass = 0.0;
  std::uint64_t cell = 0;
};

struct AtomicMeasure {
  double alpha = 0.5;
  /// Masses ν(I_σ) per level-n cell.
  DyadicMeasure cells;
  /// Cells with positive mass, by mass descending then leftmost first.
  std::vector<Atom> atoms;
  /// Mass not carried by atoms; zero at dyadic resolution.
  double continuous_remainder = 0.0;

  double total() const;
};

/// Wraps cell masses as an atomic measure, listing every positive cell.
AtomicMeasure atoms_from_cells(DyadicMeasure cells, double alpha);

/// ν(I_σ) = L_α increment over the gap μ(I_σ), one independent draw per cell
/// from the subordinator stream keyed by (seed, replica) at address 2^n + σ.
AtomicMeasure subordinate(const DyadicMeasure& measure, double alpha, std::uint64_t seed,
                          std::uint32_t replica = 0);

/// The first k atoms (all of them if there are fewer).
std::vector<Atom> largest_atoms(const AtomicMeasure& am, std::size_t k);

/// Replica mean of Σ_i ν(I_i) over a dyadic cover, subordinating the same
/// measure with replicas 0..replicas−1.
double null_set_pushforward_check(double alpha, const DyadicMeasure& measure,
                                  std::span<const DyadicInterval> cover, std::uint64_t seed,
                                  int replicas, int threads = 0);

/// Σ over cover cells of ν(I) for one subordinated measure.
double cover_mass(const DyadicMeasure& measure, std::span<const DyadicInterval> cover);

}  // namespace cascadelab
