#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace plap {

// Inputs outside the admissible range (p <= 1, s < 0 where f is undefined, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Integration breakdown. Carries the last accepted abscissa and state.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double t, std::vector<double> state)
      : std::runtime_error(what), t_(t), state_(std::move(state)) {}
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}

  double t() const { return t_; }
  const std::vector<double>& state() const { return state_; }

 private:
  double t_ = 0.0;
  std::vector<double> state_;
};

// A bracket or root search that ran out of room.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A diagnostic that could not decide (e.g. one-sided limits disagree).
class InconclusiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two independent computations of the same quantity disagree.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace plap
