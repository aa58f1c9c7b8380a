#pragma once

// Experiment orchestration: dispatch a configuration to its pipeline, collect
// statistics and checks, and persist a JSON report with CSV tables.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cascadelab/config.hpp"

namespace cascadelab {

inline constexpr int kReportSchemaVersion = 1;

/// A numeric table; written as RFC-4180 CSV with a header row.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// A statistic compared with an acceptance interval [lo, hi].
struct Check {
  std::string name;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool passed = false;
};

Check make_check(std::string name, double value, double lo, double hi);

/// Which RNG streams and replica indices a run consumed.
struct StreamUse {
  std::string stream;
  std::uint32_t first_replica = 0;
  std::uint32_t replica_count = 0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<std::pair<std::string, double>> statistics;
  std::vector<Table> tables;
  std::vector<Check> checks;
  /// Extra JSON documents written next to the report (name → content).
  std::vector<std::pair<std::string, nlohmann::ordered_json>> documents;
  std::vector<StreamUse> streams;
  int threads_used = 1;
  double wall_clock_seconds = 0.0;

  bool passed() const;
  double statistic(const std::string& name) const;
  nlohmann::ordered_json to_json() const;
};

/// Throws config unless the document has a schema_version and a seed.
void validate_report(const nlohmann::ordered_json& report);

/// RFC-4180 CSV: CRLF line ends, fields quoted when they contain a comma,
/// quote or line break; numbers with 17 significant digits.
void write_csv(const std::filesystem::path& path, const Table& table);
std::string csv_field(const std::string& s);
std::string format_double(double v);

/// Peak memory the experiment needs, and the ceiling it must fit under.
std::uint64_t estimate_memory_bytes(const ExperimentConfig& config);
std::uint64_t memory_budget_bytes(const ExperimentConfig& config);

/// Runs the pipeline, writes <output_dir>/<experiment>/report.json plus one
/// CSV per table, and returns the report. Throws resource before allocating
/// when the estimate exceeds the budget.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Same, without touching the filesystem.
ExperimentReport compute_experiment(const ExperimentConfig& config);

void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace cascadelab
