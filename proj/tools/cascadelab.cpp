// Command-line front end: one subcommand per experiment family plus verify.
// Exit status: 0 when every check passes, 1 when a check fails, 2 for bad
// input (flags or config file), 3 for runtime failures.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cascadelab/config.hpp"
#include "cascadelab/error.hpp"
#include "cascadelab/harness.hpp"
#include "cascadelab/verify.hpp"

namespace {

using namespace cascadelab;

struct Overrides {
  std::map<std::string, std::string> values;
  std::vector<std::string> sets;
};

// Registers --<key> for each config key that makes sense on `cmd`.
void add_key_flags(CLI::App* cmd, Overrides& o, const std::vector<std::string>& keys) {
  for (const std::string& key : keys) {
    std::string flag = "--" + key;
    for (char& ch : flag) {
      if (ch == '_') ch = '-';
    }
    cmd->add_option_function<std::string>(
        flag, [&o, key](const std::string& v) { o.values[key] = v; }, "override config key " + key);
  }
  cmd->add_option("--set", o.sets, "override any config key as key=value")->expected(1, -1);
}

void print_report(const ExperimentReport& rep, const std::filesystem::path& dir) {
  std::printf("%s: seed %llu, %d thread(s), %.2f s\n", experiment_name(rep.config.experiment),
              static_cast<unsigned long long>(rep.config.seed), rep.threads_used, rep.wall_clock_seconds);
  for (const auto& [name, value] : rep.statistics) std::printf("  %-32s %.10g\n", name.c_str(), value);
  for (const Check& c : rep.checks) {
    std::printf("  check %-26s %s  %.6g in [%.6g, %.6g]\n", c.name.c_str(), c.passed ? "PASS" : "FAIL", c.value,
                c.lo, c.hi);
  }
  std::printf("report written to %s\n", (dir / "report.json").string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiplicative cascade experiments on [0, 1)"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "cascadelab 1.0.0");

  std::optional<std::uint64_t> seed;
  std::optional<std::string> threads;
  std::optional<std::string> out;
  std::string config_path;
  app.add_option("--seed", seed, "master seed");
  app.add_option("--threads", threads, "worker count or auto (default: CASCADELAB_THREADS, then all cores)");
  app.add_option("--out", out, "output directory (default results)");
  app.add_option("--config", config_path, "key = value config file with per-experiment sections")
      ->check(CLI::ExistingFile);

  Overrides o;
  const std::vector<std::string> cascade_keys{"beta", "n_list", "replicas", "memory_budget_mb"};
  auto with = [&](std::vector<std::string> keys, std::initializer_list<const char*> extra) {
    for (const char* k : extra) keys.emplace_back(k);
    return keys;
  };

  std::string simulate_kind = "normalization";
  auto* simulate = app.add_subcommand("simulate", "total mass, max leaf mass or modulus statistics of cascades");
  simulate->add_option("--experiment", simulate_kind, "normalization, maxmass or modulus")
      ->check(CLI::IsMember({"normalization", "maxmass", "modulus"}));
  add_key_flags(simulate, o, with(cascade_keys, {"gamma"}));

  auto* wavefront = app.add_subcommand("wavefront", "iterate the traveling-wave recursion and track its front");
  add_key_flags(wavefront, o, {"alpha", "iterations", "dx"});

  auto* kpz = app.add_subcommand("kpz", "box dimensions of the Cantor set under the cascade and its subordination");
  add_key_flags(kpz, o, with(cascade_keys, {"alpha"}));

  auto* spectrum = app.add_subcommand("spectrum", "structure function and Legendre spectrum");
  add_key_flags(spectrum, o, with(cascade_keys, {"alpha"}));

  auto* tail = app.add_subcommand("tail", "Hill estimate of the critical total-mass tail");
  add_key_flags(tail, o, cascade_keys);

  auto* levy = app.add_subcommand("levy", "compose a cascade measure with a stable subordinator");
  add_key_flags(levy, o, with(cascade_keys, {"alpha", "top_atoms"}));

  std::string profile = "quick";
  std::vector<std::string> only;
  double exponent = 0.5;
  bool timings = false;
  auto* verify = app.add_subcommand("verify", "run the acceptance criteria and print a pass/fail matrix");
  verify->add_option("--profile", profile, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  verify->add_option("--only", only, "criterion IDs to run, e.g. A1 A6")->expected(1, -1);
  verify->add_option("--critical-exponent", exponent, "exponent of n in the critical normalization (mutation testing)");
  verify->add_flag("--timings", timings, "append per-criterion wall-clock time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) {
      VerifyOptions opt;
      if (seed) opt.seed = *seed;
      if (threads && *threads != "auto") opt.threads = std::stoi(*threads);
      if (out) opt.scratch_dir = std::filesystem::path(*out) / "verify-scratch";
      opt.only = only;
      opt.critical_exponent = exponent;
      const VerifySummary s = verify_all(profile == "full" ? VerifyProfile::full : VerifyProfile::quick, opt,
                                         [&](const CriterionResult& r) {
                                           std::printf("%s\n", format_result(r, timings).c_str());
                                           std::fflush(stdout);
                                         });
      std::printf("%s\n", s.all_passed() ? "ALL PASS" : "SOME CRITERIA FAILED");
      return s.all_passed() ? 0 : 1;
    }

    Experiment e = Experiment::normalization;
    if (simulate->parsed()) e = *parse_experiment(simulate_kind);
    if (wavefront->parsed()) e = Experiment::wavefront;
    if (kpz->parsed()) e = Experiment::kpz;
    if (spectrum->parsed()) e = Experiment::spectrum;
    if (tail->parsed()) e = Experiment::tail;
    if (levy->parsed()) e = Experiment::levy_compose;

    ConfigSections file;
    if (!config_path.empty()) file = read_config_file(config_path);
    std::map<std::string, std::string> overrides = o.values;
    for (const std::string& kv : o.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError(0, kv, "--set expects key=value");
      overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (seed) overrides["seed"] = std::to_string(*seed);
    if (threads) overrides["threads"] = *threads;
    if (out) overrides["output_dir"] = *out;

    const ExperimentConfig cfg = resolve_config(e, file, overrides);
    const ExperimentReport rep = run_experiment(cfg);
    print_report(rep, cfg.output_dir / experiment_name(cfg.experiment));
    return rep.passed() ? 0 : 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
