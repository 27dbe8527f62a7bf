#pragma once

#include <stdexcept>
#include <string>

namespace colonmap {

// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// Mismatched grid/tensor dimensions.
class ShapeError : public Error {
  public:
    explicit ShapeError(const std::string &msg) : Error(msg) {}
};

// Numerically degenerate input (collinear points, non-positive focal, ...).
class DegenerateError : public Error {
  public:
    explicit DegenerateError(const std::string &msg) : Error(msg) {}
};

// A reduction over valid pixels found none (or fewer than required).
class EmptySupportError : public DegenerateError {
  public:
    explicit EmptySupportError(const std::string &msg) : DegenerateError(msg) {}
};

// Malformed file contents (bad magic, truncation, ...).
class FormatError : public Error {
  public:
    explicit FormatError(const std::string &msg) : Error(msg) {}
};

// Dataset directory does not follow the expected layout.
class LayoutError : public Error {
  public:
    explicit LayoutError(const std::string &msg) : Error(msg) {}
};

// Scene specification that cannot be rendered (camera outside surface, ...).
class InvalidSpecError : public Error {
  public:
    explicit InvalidSpecError(const std::string &msg) : Error(msg) {}
};

// A function under numeric test returned a non-finite value.
class EvalError : public Error {
  public:
    explicit EvalError(const std::string &msg) : Error(msg) {}
};

} // namespace colonmap
