#include "cascadelab/error.hpp"

namespace cascadelab {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::domain:
      return "domain error";
    case Errc::unbounded:
      return "unbounded below";
    case Errc::no_root:
      return "no root";
    case Errc::cap_exceeded:
      return "cap exceeded";
    case Errc::overflow:
      return "overflow";
    case Errc::insufficient_samples:
      return "insufficient samples";
    case Errc::degenerate_samples:
      return "degenerate samples";
    case Errc::front_escape:
      return "front escape";
    case Errc::atomic_measure:
      return "atomic measure";
    case Errc::config:
      return "config error";
    case Errc::resource:
      return "resource error";
    case Errc::io:
      return "io error";
  }
  return "error";
}

ConfigError::ConfigError(int line, std::string field, const std::string& message)
    : Error(Errc::config, (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                              (field.empty() ? std::string() : "field '" + field + "': ") +
                              message),
      line_(line),
      field_(std::move(field)) {}

}  // namespace cascadelab
