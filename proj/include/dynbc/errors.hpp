#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dynbc {

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller violated a documented precondition (bad grid sizes, mismatched
/// field shapes, exponents outside (0,1), ...).
struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& what) : Error(what) {}
};

/// Expression text failed to parse.  `offset` is the byte position of the
/// first offending character in the input string.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t offset_)
      : Error(what + " (at offset " + std::to_string(offset_) + ")"),
        offset(offset_) {}
  std::size_t offset;
};

/// Expression evaluation hit an unbound variable, a division by zero, or a
/// non-finite intermediate value.
struct EvalError : Error {
  explicit EvalError(const std::string& what) : Error(what) {}
};

/// A config file could not be loaded or is inconsistent.
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Numerical failure inside a solver (singular step matrix, violated
/// ellipticity/transversality, fixed-point window shrunk below dt, ...).
struct SolverError : Error {
  explicit SolverError(const std::string& what) : Error(what) {}
};

}  // namespace dynbc
