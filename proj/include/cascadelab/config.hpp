#pragma once

// Experiment configuration: a key-value file with an unnamed global section
// and one [section] per experiment, overridable from the command line.
// Precedence: command line > experiment section > global keys > defaults.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cascadelab {

enum class Experiment { normalization, maxmass, modulus, tail, wavefront, kpz, spectrum, levy_compose };

const char* experiment_name(Experiment e) noexcept;
std::optional<Experiment> parse_experiment(const std::string& name);

struct ExperimentConfig {
  Experiment experiment = Experiment::normalization;
  double beta = 1.0;
  double alpha = 0.5;
  std::vector<int> n_list{12};
  int replicas = 100;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "results";
  /// 0 means automatic.
  int threads = 0;
  /// Wavefront iterations and grid spacing.
  int iterations = 60;
  double dx = 0.02;
  /// Exponent γ of the modulus statistic.
  double gamma = 1.0;
  /// Atoms listed in the composition report.
  int top_atoms = 10;
  /// Memory ceiling for one run, in MiB; 0 means half of physical memory.
  std::uint64_t memory_budget_mb = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Keys accepted in files and overrides.
const std::vector<std::string>& config_keys();

/// One key = value assignment with its source line (0 for the command line).
struct ConfigEntry {
  std::string value;
  int line = 0;
};

/// Parsed file: section name ("" for global keys) → key → entry.
using ConfigSections = std::map<std::string, std::map<std::string, ConfigEntry>>;

/// Parses INI text. Syntax errors and unknown keys or sections throw
/// ConfigError with the line.
ConfigSections parse_config_text(const std::string& text);
ConfigSections read_config_file(const std::filesystem::path& path);

/// Sets one field from its textual value; throws ConfigError(line, key, ...).
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value, int line = 0);

/// Defaults for `experiment`, then global keys, then its section, then
/// `overrides` (key → value). Validates the result.
ExperimentConfig resolve_config(Experiment experiment, const ConfigSections& file,
                                const std::map<std::string, std::string>& overrides);

}  // namespace cascadelab
