#pragma once

#include <stdexcept>
#include <string>

namespace cascadelab {

enum class Errc {
  domain,
  unbounded,
  no_root,
  cap_exceeded,
  overflow,
  insufficient_samples,
  degenerate_samples,
  front_escape,
  atomic_measure,
  config,
  resource,
  io,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Parse failure in an experiment configuration; carries the offending line
/// (0 when the value came from the command line) and field name.
class ConfigError : public Error {
 public:
  ConfigError(int line, std::string field, const std::string& message);

  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int line_;
  std::string field_;
};

}  // namespace cascadelab
