#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "cascadelab/error.hpp"
#include "cascadelab/harness.hpp"
#include "cascadelab/verify.hpp"

using namespace cascadelab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("cascadelab-harness-" + name);
  std::filesystem::remove_all(p);
  return p;
}

ExperimentConfig small(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  c.seed = 77;
  c.threads = 2;
  switch (e) {
    case Experiment::normalization:
      c.n_list = {6, 8};
      c.replicas = 64;
      break;
    case Experiment::maxmass:
    case Experiment::modulus:
      c.n_list = {6, 8};
      c.replicas = 8;
      break;
    case Experiment::tail:
      c.n_list = {8};
      c.replicas = 1000;
      break;
    case Experiment::wavefront:
      c.iterations = 12;
      c.dx = 0.05;
      break;
    case Experiment::kpz:
    case Experiment::spectrum:
      c.n_list = {10};
      c.replicas = 3;
      break;
    case Experiment::levy_compose:
      c.n_list = {8};
      c.replicas = 3;
      break;
  }
  return c;
}

}  // namespace

TEST_CASE("csv fields follow RFC 4180 quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  CHECK(csv_field("") == "");
}

TEST_CASE("doubles keep 17 significant digits") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 1.0}) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("csv files have a header and CRLF line ends") {
  const auto dir = scratch("csv");
  std::filesystem::create_directories(dir);
  write_csv(dir / "t.csv", Table{"t", {"n", "value, with comma"}, {{1.0, 0.5}, {2.0, -0.25}}});
  CHECK(slurp(dir / "t.csv") == "n,\"value, with comma\"\r\n1,0.5\r\n2,-0.25\r\n");
  std::filesystem::remove_all(dir);
}

TEST_CASE("report validation requires a schema version and a seed") {
  ExperimentReport rep;
  rep.config.seed = 3;
  nlohmann::ordered_json j = rep.to_json();
  CHECK_NOTHROW(validate_report(j));
  auto no_seed = j;
  no_seed.erase("seed");
  CHECK_THROWS_AS(validate_report(no_seed), Error);
  auto bad_seed = j;
  bad_seed["seed"] = "3";
  CHECK_THROWS_AS(validate_report(bad_seed), Error);
  auto no_version = j;
  no_version.erase("schema_version");
  CHECK_THROWS_AS(validate_report(no_version), Error);
  auto future = j;
  future["schema_version"] = kReportSchemaVersion + 1;
  CHECK_THROWS_AS(validate_report(future), Error);
  CHECK_THROWS_AS(validate_report(nlohmann::ordered_json::array()), Error);
}

TEST_CASE("checks and pass status") {
  CHECK(make_check("x", 0.5, 0.0, 1.0).passed);
  CHECK_FALSE(make_check("x", 1.5, 0.0, 1.0).passed);
  CHECK_FALSE(make_check("x", std::nan(""), 0.0, 1.0).passed);
  ExperimentReport rep;
  rep.checks = {make_check("a", 0.5, 0.0, 1.0), make_check("b", 2.0, 0.0, 1.0)};
  CHECK_FALSE(rep.passed());
  rep.checks.pop_back();
  CHECK(rep.passed());
}

TEST_CASE("runs over budget fail before allocating") {
  ExperimentConfig c = small(Experiment::kpz);
  c.n_list = {28};
  c.memory_budget_mb = 64;
  try {
    compute_experiment(c);
    FAIL("expected a resource error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::resource);
  }
  c.n_list = {10};
  CHECK(estimate_memory_bytes(c) < memory_budget_bytes(c));
  CHECK(memory_budget_bytes(c) == 64ull << 20);
}

TEST_CASE("wavefront example speed") {
  ExperimentConfig c;
  c.experiment = Experiment::wavefront;
  c.alpha = 0.5;
  c.iterations = 60;
  c.dx = 0.02;
  const ExperimentReport rep = compute_experiment(c);
  CHECK(std::abs(rep.statistic("speed") - 1.636294) < 1e-3);
  CHECK(rep.passed());
}

TEST_CASE("every experiment runs small and writes a valid report") {
  const auto dir = scratch("all");
  for (Experiment e : {Experiment::normalization, Experiment::maxmass, Experiment::modulus, Experiment::tail,
                       Experiment::wavefront, Experiment::kpz, Experiment::spectrum, Experiment::levy_compose}) {
    const std::string name = experiment_name(e);
    CAPTURE(name);
    ExperimentConfig c = small(e);
    c.output_dir = dir;
    const ExperimentReport rep = run_experiment(c);
    const auto out = dir / experiment_name(e);
    const auto j = nlohmann::ordered_json::parse(slurp(out / "report.json"));
    CHECK_NOTHROW(validate_report(j));
    CHECK(j["seed"].get<std::uint64_t>() == 77);
    CHECK(j["experiment"] == experiment_name(e));
    CHECK(j["audit"]["threads"] == 2);
    CHECK_FALSE(rep.statistics.empty());
    for (const Table& t : rep.tables) {
      CAPTURE(t.name);
      const std::string csv = slurp(out / (t.name + ".csv"));
      CHECK(csv.rfind(csv_field(t.columns.front()), 0) == 0);
      std::size_t lines = 0;
      for (std::size_t p = csv.find("\r\n"); p != std::string::npos; p = csv.find("\r\n", p + 2)) ++lines;
      CHECK(lines == t.rows.size() + 1);
    }
  }
  CHECK(std::filesystem::exists(dir / "levy-compose" / "atoms.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("reruns are bit-identical apart from the wall clock") {
  for (Experiment e : {Experiment::tail, Experiment::maxmass, Experiment::spectrum}) {
    const std::string name = experiment_name(e);
    CAPTURE(name);
    ExperimentConfig c = small(e);
    c.threads = 3;
    auto a = compute_experiment(c).to_json();
    auto b = compute_experiment(c).to_json();
    a["audit"].erase("wall_clock_seconds");
    b["audit"].erase("wall_clock_seconds");
    CHECK(a.dump() == b.dump());
  }
}

TEST_CASE("thread count does not change results") {
  ExperimentConfig c = small(Experiment::normalization);
  c.threads = 1;
  const ExperimentReport one = compute_experiment(c);
  c.threads = 4;
  const ExperimentReport four = compute_experiment(c);
  REQUIRE(one.statistics.size() == four.statistics.size());
  for (std::size_t i = 0; i < one.statistics.size(); ++i) CHECK(one.statistics[i] == four.statistics[i]);
}

TEST_CASE("a different seed changes the sample") {
  ExperimentConfig c = small(Experiment::tail);
  const double a = compute_experiment(c).statistic("index_hat");
  c.seed = 78;
  CHECK(compute_experiment(c).statistic("index_hat") != a);
}

TEST_CASE("verify runs selected criteria and reproduces its matrix") {
  CHECK(criterion_ids().size() == 12);
  CHECK(criterion_ids().front() == "A1");
  CHECK(criterion_ids().back() == "A12");
  VerifyOptions opt;
  opt.only = {"A6", "A1"};
  std::vector<std::string> seen;
  const VerifySummary a = verify_all(VerifyProfile::quick, opt, [&](const CriterionResult& r) { seen.push_back(r.id); });
  CHECK(seen == std::vector<std::string>{"A1", "A6"});
  CHECK(a.all_passed());
  const VerifySummary b = verify_all(VerifyProfile::quick, opt);
  CHECK(a.matrix() == b.matrix());
  CHECK(a.matrix().rfind("A1   PASS", 0) == 0);
  opt.only = {"A13"};
  CHECK_THROWS_AS(verify_all(VerifyProfile::quick, opt), Error);
  CHECK_FALSE(VerifySummary{}.all_passed());
}
