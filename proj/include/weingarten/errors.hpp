// Exception hierarchy shared by every module of the library.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace weingarten {

/// Base class of all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// relation
class NoSignChange : public Error { using Error::Error; };
class Inconclusive : public Error { using Error::Error; };
class OutOfRange : public Error { using Error::Error; };
class NotElliptic : public Error { using Error::Error; };

// gparser
class EvalError : public Error { using Error::Error; };

/// Malformed DSL input. Carries the byte offset of the offending token and
/// the set of tokens the parser would have accepted there.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected,
             const std::string& what)
      : Error("parse error at offset " + std::to_string(offset) + ": " + what),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

// phasespace / integrator
class DomainError : public Error { using Error::Error; };
class CurvatureDomainError : public DomainError { using DomainError::DomainError; };

// classify / linearcmp
class Unclassified : public Error { using Error::Error; };
class CertificationFailed : public Error { using Error::Error; };
class QuadratureFailure : public Error { using Error::Error; };
class EnvelopeViolation : public Error { using Error::Error; };

// cli
class ConfigError : public Error { using Error::Error; };
class EmptyOrbit : public Error { using Error::Error; };

}  // namespace weingarten
