#pragma once

// Branching random walk on the binary tree and the measures built from it.
// Leaf potentials X_σ are never stored for the whole tree unless asked for:
// they are produced in blocks of 2^14 consecutive leaves, each block rebuilt
// from the root path sum, so memory stays constant in n.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cascadelab/rng.hpp"
#include "cascadelab/spectral.hpp"

namespace cascadelab {

inline constexpr int kDefaultLevelCap = 30;
inline constexpr int kBlockLevels = 14;

struct CascadeSpec {
  int level_n = 1;
  SpectralModel model = SpectralModel::gaussian_critical();
  std::uint64_t seed = 0;
  double beta = 1.0;
  std::uint32_t replica = 0;
  int level_cap = kDefaultLevelCap;

  /// Throws cap_exceeded for level_n above the cap, domain for other faults.
  void validate() const;
};

namespace detail {

struct IncrementLaw {
  double mean = 0.0;
  double stddev = 0.0;
};

IncrementLaw increment_law(const SpectralModel& model);

/// Children of `count` consecutive nodes at parent_depth starting at
/// in-level index first_parent. child_x[2i], child_x[2i+1] are the children
/// of parent_x[i]. One RNG call per parent yields both increments.
void expand_level(const IncrementLaw& law, const StreamKey& key, int parent_depth,
                  std::uint64_t first_parent, std::uint64_t count, const double* parent_x,
                  double* child_x);

/// The two child increments of the node with heap index `address`.
void increment_pair(const IncrementLaw& law, const StreamKey& key, std::uint64_t address,
                    double& left, double& right);

/// X at node (depth, index), folded from the root.
double path_sum(const IncrementLaw& law, const StreamKey& key, int depth, std::uint64_t index);

}  // namespace detail

/// One realization of the 2^n leaf potentials.
class LeafEnsemble {
 public:
  explicit LeafEnsemble(const CascadeSpec& spec);

  const CascadeSpec& spec() const noexcept { return spec_; }
  int level() const noexcept { return spec_.level_n; }
  std::uint64_t size() const noexcept { return std::uint64_t{1} << spec_.level_n; }
  std::uint64_t block_size() const noexcept { return std::uint64_t{1} << block_levels_; }
  std::uint64_t block_count() const noexcept { return size() >> block_levels_; }

  /// Leaves [b·block_size, (b+1)·block_size) into out (size block_size()).
  /// scratch must also hold block_size() doubles.
  void generate_block(std::uint64_t b, std::span<double> out, std::span<double> scratch) const;

  /// f(first_leaf, span of block_size() potentials), blocks left to right.
  template <class F>
  void for_each_block(F&& f) const {
    std::vector<double> out(block_size());
    std::vector<double> scratch(block_size());
    for (std::uint64_t b = 0; b < block_count(); ++b) {
      generate_block(b, out, scratch);
      f(b * block_size(), std::span<const double>(out));
    }
  }

  /// f(leaf_index, X) in depth-first (left to right) order.
  template <class F>
  void for_each(F&& f) const {
    for_each_block([&](std::uint64_t first, std::span<const double> xs) {
      for (std::size_t i = 0; i < xs.size(); ++i) f(first + i, xs[i]);
    });
  }

  std::vector<double> materialize() const;

 private:
  CascadeSpec spec_;
  detail::IncrementLaw law_;
  StreamKey key_;
  int block_levels_;
};

LeafEnsemble generate_leaves(const CascadeSpec& spec);

/// Reference generator: expands the full tree level by level in one array.
std::vector<double> generate_leaves_naive(const CascadeSpec& spec);

/// Z_{β,n} = Σ e^{βX_σ}. Throws overflow if it is not representable.
double partition_function(const LeafEnsemble& ens, double beta);
/// log Z_{β,n}, finite whenever the leaves are.
double log_partition_function(const LeafEnsemble& ens, double beta);
/// log Z for several β in one pass over the leaves.
std::vector<double> log_partition_functions(const LeafEnsemble& ens, std::span<const double> betas);

/// n^{1/2} Z_{1,n} for θ = 1, n^{3θ/2} Z_{θ,n} otherwise.
double normalized_statistic(const LeafEnsemble& ens, double theta);

/// log of the factor that turns Z_{β,n} into the normalized total mass:
/// −nφ̃(β) ln 2, (1/2) ln n or (3β/2) ln n.
double log_normalization(const SpectralModel& model, int n, double beta);

enum class NormalizationTag { subcritical, critical, supercritical, raw, uniform_stub };

const char* tag_name(NormalizationTag tag) noexcept;

struct DyadicMeasure {
  int level = 0;
  std::vector<double> masses;
  NormalizationTag tag = NormalizationTag::raw;

  std::uint64_t size() const noexcept { return masses.size(); }
  /// Fixed-order pairwise sum.
  double total() const;
  /// F(k/2^n) = Σ_{j<k} masses[j], k in [0, 2^n].
  std::vector<double> cdf() const;
  /// Aggregated to a coarser level (level <= this->level).
  DyadicMeasure coarsen(int to_level) const;
  /// Throws domain if a mass is negative or not finite.
  void validate() const;
};

/// Regime-normalized leaf masses of the ensemble at inverse temperature β.
DyadicMeasure build_measure(const LeafEnsemble& ens, double beta);
DyadicMeasure raw_measure(const LeafEnsemble& ens, double beta);
DyadicMeasure uniform_measure(int level);

/// μ(I_σ) = e^{X_σ}·Y_σ with Y_σ drawn independently (by cell address) from
/// a bank of critical total-mass samples. Equal in law to the cell masses of
/// the limiting critical measure, up to the depth used for the bank.
DyadicMeasure semistable_measure(const LeafEnsemble& ens, std::span<const double> bank);

double max_leaf_mass(const DyadicMeasure& measure);

/// Normalized total masses of `replicas` independent cascades; replica r uses
/// the template's replica index plus r.
std::vector<double> sample_total_mass(const CascadeSpec& tmpl, double beta, int replicas,
                                      int threads = 0);

/// log Z_{β,n} of `replicas` independent cascades for each β (result[b][r]).
std::vector<std::vector<double>> sample_log_partition(const CascadeSpec& tmpl,
                                                      std::span<const double> betas,
                                                      int replicas, int threads = 0);

/// One step of the smoothing recursion: log(e^{βξ₀}Z₀ + e^{βξ₁}Z₁) with fresh
/// increments ξ drawn from the composition stream at address `index`.
double compose_log_partition(const SpectralModel& model, double beta, std::uint64_t seed,
                             std::uint64_t index, double log_z0, double log_z1);

/// max over dyadic I of levels 1..n of μ(I)·(log(1 + 1/|I|))^γ.
double modulus_statistic(const DyadicMeasure& measure, double gamma);
/// max over dyadic I of μ(I)·|I|^{−φ̃(β)}·(log(1 + 1/|I|))^{γβ}.
double submodulus_statistic(const DyadicMeasure& measure, const SpectralModel& model,
                            double beta, double gamma);

/// Little-endian dump: "CASC", u32 version, u32 level, u32 count, f64 masses.
void write_measure(const std::filesystem::path& path, const DyadicMeasure& measure);
DyadicMeasure read_measure(const std::filesystem::path& path);

}  // namespace cascadelab
