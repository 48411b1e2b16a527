#ifndef BSYNTH_ERROR_HPP
#define BSYNTH_ERROR_HPP

#include <stdexcept>
#include <string>

namespace bsynth {

/// Broad failure category, surfaced by the CLI as a structured error.
enum class ErrorKind {
  io,
  parse,
  validation,
  config,
  model,
  sampler,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::config: return "config";
    case ErrorKind::model: return "model";
    case ErrorKind::sampler: return "sampler";
  }
  return "unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

}  // namespace bsynth

#endif  // BSYNTH_ERROR_HPP
