#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dagnn {

// Base class for everything this library throws on contract violations.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// dag construction
struct CycleError : Error {
  using Error::Error;
};
struct SelfLoopError : Error {
  using Error::Error;
};
struct DuplicateEdgeError : Error {
  using Error::Error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct InvalidPermutation : Error {
  using Error::Error;
};
struct EmptyInput : Error {
  using Error::Error;
};

// numeric core
struct ShapeError : Error {
  using Error::Error;
};
struct NonFiniteError : Error {
  using Error::Error;
};

// dataset io
struct IoError : Error {
  using Error::Error;
};
struct ParseError : Error {
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

// training / metrics
struct NonFiniteLoss : Error {
  using Error::Error;
};
struct DegenerateError : Error {
  using Error::Error;
};

}  // namespace dagnn
