#pragma once

#include <stdexcept>
#include <string>

namespace squash {

/// Input outside the domain of a formula (negative rate, eta outside (0,1], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Parameters that make a formula singular, e.g. Gamma == 0.
class SingularParameters : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The stationary state does not exist for these parameters.
class UnstableParameters : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Effective bath violating |M|^2 <= N(N+1).
class NonPhysicalBath : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Population leaked into the top of the truncated Fock space.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StepSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace squash
