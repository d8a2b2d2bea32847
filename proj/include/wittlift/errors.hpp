#pragma once

#include <stdexcept>
#include <string>

namespace wittlift {

// Error codes double as machine-readable tags in CLI output.
enum class ErrorKind {
  Usage,        // bad parameters / malformed input
  Solver,       // a construction step could not complete
  Verification, // a certificate clause failed
  Internal,
};

struct WittError : std::runtime_error {
  std::string code;
  ErrorKind kind;

  WittError(ErrorKind k, std::string c, const std::string& msg)
      : std::runtime_error(c + ": " + msg), code(std::move(c)), kind(k) {}
};

inline WittError usage_error(std::string code, const std::string& msg) {
  return WittError(ErrorKind::Usage, std::move(code), msg);
}
inline WittError solver_error(std::string code, const std::string& msg) {
  return WittError(ErrorKind::Solver, std::move(code), msg);
}
inline WittError verification_error(std::string code, const std::string& msg) {
  return WittError(ErrorKind::Verification, std::move(code), msg);
}
inline WittError internal_error(const std::string& msg) {
  return WittError(ErrorKind::Internal, "Internal", msg);
}

} // namespace wittlift
