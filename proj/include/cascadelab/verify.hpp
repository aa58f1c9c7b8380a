#pragma once

// The acceptance suite A1–A12 with a reduced (quick) and a full budget.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace cascadelab {

enum class VerifyProfile { quick, full };

struct VerifyOptions {
  std::uint64_t seed = 20130707;
  int threads = 0;
  /// Scratch space for the determinism reruns.
  std::filesystem::path scratch_dir = std::filesystem::temp_directory_path() / "cascadelab-verify";
  /// Criterion IDs to run ("A1", ...); empty runs all.
  std::vector<std::string> only;
  /// Exponent of n in the critical normalization checked by A2. Anything but
  /// 1/2 is a deliberately broken build.
  double critical_exponent = 0.5;
};

struct CriterionResult {
  std::string id;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifySummary {
  VerifyProfile profile = VerifyProfile::quick;
  std::vector<CriterionResult> results;

  bool all_passed() const;
  /// One "ID PASS|FAIL detail" line per criterion.
  std::string matrix() const;
};

const std::vector<std::string>& criterion_ids();

/// Runs the suite; `on_result` sees each criterion as soon as it finishes.
VerifySummary verify_all(VerifyProfile profile, const VerifyOptions& options = {},
                         const std::function<void(const CriterionResult&)>& on_result = {});

/// "ID PASS|FAIL detail"; the timing suffix is optional so that matrices from
/// two runs with the same seed compare equal.
std::string format_result(const CriterionResult& r, bool with_time = false);

}  // namespace cascadelab
