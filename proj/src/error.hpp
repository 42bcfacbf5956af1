#pragma once

#include <stdexcept>
#include <string>

namespace cavitylb {

// Parameter outside the domain of an operation (λ ≥ 1, scv < 1, ...).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical procedure could not produce an answer (singular solve, empty
// bisection bracket, reducible chain).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed text input: PH spec strings, JSON documents.
class ParseError : public std::invalid_argument {
 public:
  explicit ParseError(const std::string& what) : std::invalid_argument(what) {}
};

// A file could not be read or written.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cavitylb
