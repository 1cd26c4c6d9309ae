#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace wavemech {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
  dimension,
  shape,
  out_of_bounds,
  singularity,
  superluminal,
  precondition,
  configuration,
  diverged,
  io,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto exit codes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace wavemech
