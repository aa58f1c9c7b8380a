#include "cascadelab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "cascadelab/cascade.hpp"
#include "cascadelab/error.hpp"

namespace cascadelab {

namespace {

constexpr std::pair<Experiment, const char*> kNames[] = {
    {Experiment::normalization, "normalization"}, {Experiment::maxmass, "maxmass"},
    {Experiment::modulus, "modulus"},             {Experiment::tail, "tail"},
    {Experiment::wavefront, "wavefront"},         {Experiment::kpz, "kpz"},
    {Experiment::spectrum, "spectrum"},           {Experiment::levy_compose, "levy-compose"},
};

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

template <class T>
T parse_integer(const std::string& key, const std::string& value, int line) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(line, key, "expected an integer, got '" + value + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value, int line) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw ConfigError(line, key, "expected a finite number, got '" + value + "'");
  }
  return out;
}

std::vector<int> parse_levels(const std::string& key, const std::string& value, int line) {
  std::string body = value;
  if (!body.empty() && body.front() == '[' && body.back() == ']') body = body.substr(1, body.size() - 2);
  std::replace(body.begin(), body.end(), ',', ' ');
  std::istringstream in(body);
  std::vector<int> out;
  std::string item;
  while (in >> item) {
    const int n = parse_integer<int>(key, item, line);
    if (n < 1 || n > kDefaultLevelCap) {
      throw ConfigError(line, key, "depth " + item + " outside [1, " + std::to_string(kDefaultLevelCap) + "]");
    }
    out.push_back(n);
  }
  if (out.empty()) throw ConfigError(line, key, "needs at least one depth");
  return out;
}

void set_defaults(ExperimentConfig& c) {
  switch (c.experiment) {
    case Experiment::normalization:
      c.n_list = {12, 16};
      c.replicas = 1000;
      break;
    case Experiment::maxmass:
      c.n_list = {12, 14, 16, 18};
      c.replicas = 100;
      break;
    case Experiment::modulus:
      c.n_list = {10, 12, 14, 16};
      c.replicas = 50;
      break;
    case Experiment::tail:
      c.n_list = {14};
      c.replicas = 10000;
      break;
    case Experiment::wavefront:
      c.alpha = 0.5;
      c.iterations = 60;
      break;
    case Experiment::kpz:
      c.n_list = {18};
      c.replicas = 50;
      break;
    case Experiment::spectrum:
      c.n_list = {16};
      c.replicas = 20;
      break;
    case Experiment::levy_compose:
      c.n_list = {14};
      c.replicas = 20;
      break;
  }
}

}  // namespace

const char* experiment_name(Experiment e) noexcept {
  for (const auto& [k, name] : kNames) {
    if (k == e) return name;
  }
  return "unknown";
}

std::optional<Experiment> parse_experiment(const std::string& name) {
  for (const auto& [k, n] : kNames) {
    if (name == n) return k;
  }
  return std::nullopt;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{"experiment", "beta",  "alpha",     "n_list",
                                             "replicas",   "seed",  "output_dir", "threads",
                                             "iterations", "dx",    "gamma",     "top_atoms",
                                             "memory_budget_mb"};
  return keys;
}

void ExperimentConfig::validate() const {
  if (n_list.empty()) throw ConfigError(0, "n_list", "needs at least one depth");
  for (int n : n_list) {
    if (n < 1 || n > kDefaultLevelCap) throw ConfigError(0, "n_list", "depth outside the level cap");
  }
  if (replicas < 1) throw ConfigError(0, "replicas", "must be at least 1");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError(0, "beta", "must be positive");
  if (!(alpha > 0.0)) throw ConfigError(0, "alpha", "must be positive");
  if (experiment == Experiment::levy_compose && !(alpha < 1.0)) {
    throw ConfigError(0, "alpha", "the subordinator index must lie in (0, 1)");
  }
  if (iterations < 1) throw ConfigError(0, "iterations", "must be at least 1");
  if (!(dx > 0.0)) throw ConfigError(0, "dx", "must be positive");
  if (threads < 0) throw ConfigError(0, "threads", "must be a positive integer or auto");
  if (top_atoms < 1) throw ConfigError(0, "top_atoms", "must be at least 1");
  if (output_dir.empty()) throw ConfigError(0, "output_dir", "must not be empty");
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value, int line) {
  if (key == "experiment") {
    const auto e = parse_experiment(value);
    if (!e) throw ConfigError(line, key, "unknown experiment '" + value + "'");
    c.experiment = *e;
  } else if (key == "beta") {
    c.beta = parse_real(key, value, line);
    if (!(c.beta > 0.0)) throw ConfigError(line, key, "must be positive");
  } else if (key == "alpha") {
    if (value == "inf" || value == "infinity") {
      c.alpha = std::numeric_limits<double>::infinity();
      return;
    }
    c.alpha = parse_real(key, value, line);
    if (!(c.alpha > 0.0)) throw ConfigError(line, key, "must be positive");
  } else if (key == "n_list") {
    c.n_list = parse_levels(key, value, line);
  } else if (key == "replicas") {
    c.replicas = parse_integer<int>(key, value, line);
    if (c.replicas < 1) throw ConfigError(line, key, "must be at least 1");
  } else if (key == "seed") {
    c.seed = parse_integer<std::uint64_t>(key, value, line);
  } else if (key == "output_dir") {
    if (value.empty()) throw ConfigError(line, key, "must not be empty");
    c.output_dir = value;
  } else if (key == "threads") {
    if (value == "auto") {
      c.threads = 0;
    } else {
      c.threads = parse_integer<int>(key, value, line);
      if (c.threads < 1) throw ConfigError(line, key, "must be a positive integer or auto");
    }
  } else if (key == "iterations") {
    c.iterations = parse_integer<int>(key, value, line);
    if (c.iterations < 1) throw ConfigError(line, key, "must be at least 1");
  } else if (key == "dx") {
    c.dx = parse_real(key, value, line);
    if (!(c.dx > 0.0)) throw ConfigError(line, key, "must be positive");
  } else if (key == "gamma") {
    c.gamma = parse_real(key, value, line);
  } else if (key == "top_atoms") {
    c.top_atoms = parse_integer<int>(key, value, line);
    if (c.top_atoms < 1) throw ConfigError(line, key, "must be at least 1");
  } else if (key == "memory_budget_mb") {
    c.memory_budget_mb = parse_integer<std::uint64_t>(key, value, line);
  } else {
    throw ConfigError(line, key, "unknown key");
  }
}

ConfigSections parse_config_text(const std::string& text) {
  ConfigSections out;
  out[""];
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::size_t hash = raw.find_first_of("#;");
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, "", "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!parse_experiment(section)) throw ConfigError(line, section, "unknown section");
      out[section];
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "", "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError(line, key, "unknown key");
    if (key == "experiment" && !section.empty()) {
      throw ConfigError(line, key, "only allowed before the first section");
    }
    auto& entries = out[section];
    if (entries.count(key)) {
      throw ConfigError(line, key, "duplicate key (first set on line " + std::to_string(entries[key].line) + ")");
    }
    entries[key] = {value, line};
  }
  return out;
}

ConfigSections read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

ExperimentConfig resolve_config(Experiment experiment, const ConfigSections& file,
                                const std::map<std::string, std::string>& overrides) {
  ExperimentConfig c;
  c.experiment = experiment;
  set_defaults(c);
  auto apply_section = [&](const std::string& name) {
    const auto it = file.find(name);
    if (it == file.end()) return;
    for (const auto& [key, entry] : it->second) {
      if (key == "experiment") continue;
      apply_setting(c, key, entry.value, entry.line);
    }
  };
  apply_section("");
  apply_section(experiment_name(experiment));
  for (const auto& [key, value] : overrides) {
    if (key == "experiment") continue;
    apply_setting(c, key, value, 0);
  }
  c.validate();
  return c;
}

}  // namespace cascadelab
