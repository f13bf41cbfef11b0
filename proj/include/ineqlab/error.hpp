#pragma once

#include <stdexcept>
#include <string>

namespace ineqlab {

/// Precondition violated by a caller-supplied argument.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An integral whose analytic tail beyond R_max does not converge.
class TailDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A 1-D minimization whose bracket holds no interior minimum.
class OptimizationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Free energy / Fisher information evaluated away from the Barenblatt mass.
class MassMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative eigensolver did not reach tolerance.
class EigensolverNonconvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time stepper could not keep the solution positive.
class BlowDownInstability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A constraint the caller promised (normalization, moments) does not hold.
class ConstraintViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ineqlab
