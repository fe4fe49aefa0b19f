#pragma once

#include <stdexcept>
#include <string>

namespace mapnbv {

// Precondition violations use std::invalid_argument directly; the types below
// name the failure modes callers are expected to branch on.

struct EmptyInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateObjectError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateMeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// RRT-Connect ran out of iterations. Callers treat the goal as infeasible.
struct PlanningFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No feasible team assignment exists this step.
struct PlannerStuck : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SetupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UndefinedMetricError : std::domain_error {
  using std::domain_error::domain_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

}  // namespace mapnbv
