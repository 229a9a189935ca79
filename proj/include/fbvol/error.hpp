#pragma once

#include <stdexcept>
#include <string>

namespace fbvol {

/// Failure categories; the CLI maps each one onto a process exit code.
enum class ErrorKind {
  Config,     ///< invalid parameters or malformed config (exit 2)
  Numerical,  ///< stability / positivity violations (exit 3)
  Range,      ///< argument outside the admissible domain (exit 2)
  Io,         ///< file system problems (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Range: return "range";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace fbvol
