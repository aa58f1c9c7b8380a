#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <string>

#include "cascadelab/config.hpp"
#include "cascadelab/error.hpp"

using namespace cascadelab;

namespace {

// Line and field of the ConfigError thrown by `fn`, or (-1, "") if none.
template <class F>
std::pair<int, std::string> config_error(F&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return {e.line(), e.field()};
  }
  return {-1, ""};
}

}  // namespace

TEST_CASE("experiment names round-trip") {
  for (Experiment e : {Experiment::normalization, Experiment::maxmass, Experiment::modulus, Experiment::tail,
                       Experiment::wavefront, Experiment::kpz, Experiment::spectrum, Experiment::levy_compose}) {
    const auto back = parse_experiment(experiment_name(e));
    REQUIRE(back);
    CHECK(*back == e);
  }
  CHECK_FALSE(parse_experiment("levy_compose"));
  CHECK_FALSE(parse_experiment(""));
}

TEST_CASE("parsing sections, comments and values") {
  const auto s = parse_config_text(
      "# global keys\n"
      "seed = 42\n"
      "replicas=7 ; trailing comment\n"
      "\n"
      "[tail]\r\n"
      "n_list = [10, 12]\n"
      "[wavefront]\n"
      "alpha = inf\n");
  REQUIRE(s.count(""));
  CHECK(s.at("").at("seed").value == "42");
  CHECK(s.at("").at("seed").line == 2);
  CHECK(s.at("").at("replicas").value == "7");
  CHECK(s.at("tail").at("n_list").value == "[10, 12]");
  CHECK(s.at("tail").at("n_list").line == 6);
  CHECK(s.at("wavefront").at("alpha").value == "inf");
}

TEST_CASE("syntax errors carry the line") {
  CHECK(config_error([] { parse_config_text("seed = 1\njunk\n"); }).first == 2);
  CHECK(config_error([] { parse_config_text("[tail\n"); }).first == 1);
  const auto section = config_error([] { parse_config_text("\n\n[nonsense]\n"); });
  CHECK(section.first == 3);
  CHECK(section.second == "nonsense");
  const auto key = config_error([] { parse_config_text("seed = 1\ncolour = red\n"); });
  CHECK(key.first == 2);
  CHECK(key.second == "colour");
  const auto dup = config_error([] { parse_config_text("[kpz]\nbeta = 1\nbeta = 2\n"); });
  CHECK(dup.first == 3);
  CHECK(dup.second == "beta");
  CHECK(config_error([] { parse_config_text("[kpz]\nexperiment = tail\n"); }).first == 2);
}

TEST_CASE("value errors name the field and line") {
  const auto file = parse_config_text("seed = 3\n[tail]\nreplicas = 0\n");
  const auto e = config_error([&] { resolve_config(Experiment::tail, file, {}); });
  CHECK(e.first == 3);
  CHECK(e.second == "replicas");

  for (const auto& [key, value] : std::map<std::string, std::string>{{"beta", "-1"},
                                                                     {"beta", "x"},
                                                                     {"n_list", "[]"},
                                                                     {"n_list", "12, 99"},
                                                                     {"threads", "0"},
                                                                     {"dx", "0"},
                                                                     {"seed", "-4"},
                                                                     {"top_atoms", "1.5"}}) {
    CAPTURE(key);
    CAPTURE(value);
    ExperimentConfig c;
    const auto err = config_error([&] { apply_setting(c, key, value, 9); });
    CHECK(err.first == 9);
    CHECK(err.second == key);
  }
  ExperimentConfig c;
  c.experiment = Experiment::levy_compose;
  c.alpha = 1.0;
  CHECK(config_error([&] { c.validate(); }).second == "alpha");
}

TEST_CASE("precedence: command line over section over global over defaults") {
  const auto file = parse_config_text(
      "seed = 5\n"
      "replicas = 11\n"
      "beta = 0.7\n"
      "[tail]\n"
      "replicas = 22\n");
  const ExperimentConfig defaults = resolve_config(Experiment::kpz, {}, {});
  CHECK(defaults.n_list == std::vector<int>{18});
  CHECK(defaults.replicas == 50);

  const ExperimentConfig global = resolve_config(Experiment::kpz, file, {});
  CHECK(global.seed == 5);
  CHECK(global.replicas == 11);

  const ExperimentConfig section = resolve_config(Experiment::tail, file, {});
  CHECK(section.replicas == 22);
  CHECK(section.beta == doctest::Approx(0.7));

  const ExperimentConfig cli = resolve_config(Experiment::tail, file, {{"replicas", "33"}, {"n_list", "9 10"}});
  CHECK(cli.replicas == 33);
  CHECK(cli.n_list == std::vector<int>{9, 10});
  CHECK(cli.seed == 5);
  CHECK(cli.experiment == Experiment::tail);
}

TEST_CASE("special values") {
  ExperimentConfig c;
  apply_setting(c, "alpha", "inf");
  CHECK(std::isinf(c.alpha));
  apply_setting(c, "threads", "auto");
  CHECK(c.threads == 0);
  apply_setting(c, "threads", "3");
  CHECK(c.threads == 3);
  apply_setting(c, "n_list", "12,14 16");
  CHECK(c.n_list == std::vector<int>{12, 14, 16});
  apply_setting(c, "seed", "18446744073709551615");
  CHECK(c.seed == 18446744073709551615ull);
}

TEST_CASE("config files") {
  const auto path = std::filesystem::temp_directory_path() / "cascadelab-config-test.ini";
  {
    std::ofstream out(path);
    out << "[spectrum]\nreplicas = 4\n";
  }
  const auto s = read_config_file(path);
  CHECK(s.at("spectrum").at("replicas").value == "4");
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_config_file(path), Error);
}
