#pragma once

#include <stdexcept>
#include <string>

namespace physim {

// Parameter outside the documented domain (eps <= 0, negative cost, rate < 1, ...).
struct invalid_parameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Shapes of matrices/vectors do not agree.
struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Input is well formed but outside what the simulator models (e.g. negative
// entries for bit decomposition).
struct unsupported_input : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A simulator broke one of its own correctness obligations. Never expected to
// fire; tests assert that it does not.
struct simulation_fault : std::logic_error {
  using std::logic_error::logic_error;
};

// Operation called on an object in the wrong state (e.g. a kinetic grid that
// was not reset between matrix-vector products).
struct state_error : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace physim
