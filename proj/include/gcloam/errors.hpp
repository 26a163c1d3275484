#pragma once

#include <stdexcept>
#include <string>

namespace gcloam {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Residual anchors coincide (line) or are collinear (plane).
struct DegenerateAnchors : Error {
  using Error::Error;
};

// Fewer effective scalar residuals than pose degrees of freedom.
struct UnderConstrained : Error {
  using Error::Error;
};

// Normal equations stayed singular after exhausting damping retries.
struct SingularNormalEquations : Error {
  using Error::Error;
};

struct MalformedFile : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(const std::string& msg, int line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
  int line_number;
};

struct EmptyTree : Error {
  using Error::Error;
};

struct InsufficientNeighbors : Error {
  using Error::Error;
};

struct NoOverlap : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace gcloam
