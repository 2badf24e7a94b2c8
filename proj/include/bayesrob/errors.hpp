#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bayesrob {

/// Input violates a documented precondition (non-finite value, bad size, bad config).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Correspondences do not pin down a rigid transform (collinear, too few weighted points).
class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The weights handed to a solver sum to (numerically) zero.
class WeightSumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pose graph normal equations are singular because part of the graph is not anchored.
class RankDeficiency : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver call failed inside the robust loop; the message carries the iteration.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(std::size_t iteration, const std::string& what)
      : std::runtime_error("solver failed at robust iteration " + std::to_string(iteration) + ": " +
                           what),
        iteration_(iteration) {}

  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

/// Malformed input file. `line` is 1-based, 0 when the location is the whole file.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
                           what),
        path_(path),
        line_(line) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

}  // namespace bayesrob
