#pragma once

#include <stdexcept>
#include <string>

namespace dk {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed formula / variant / script / model text. Carries a position when
// the input is positional (1-based line and column).
struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(what) {}
  ParseError(const std::string& what, int line, int column)
      : Error(what + " at " + std::to_string(line) + ":" + std::to_string(column)),
        line(line),
        column(column) {}

  int line = 0;
  int column = 0;
};

// Structurally valid input that violates a model-level contract: undeclared
// worlds/agents/atoms, broken frame conditions, bad generator parameters.
struct ModelError : Error {
  using Error::Error;
};

// Deliberate refusal to run a search whose size bound is exceeded.
struct BoundError : Error {
  using Error::Error;
};

}  // namespace dk
