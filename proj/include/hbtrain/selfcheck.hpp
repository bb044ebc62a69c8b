#pragma once

#include <iosfwd>

namespace hbtrain {

/// Deliberate defects for exercising the selfcheck harness itself.
enum class SelfcheckFault {
  none,
  /// Builds the noise covariance in the Gram-equivalence check with a plain
  /// transpose instead of the conjugate transpose.
  skip_hermitianization,
};

/// Runs the library's invariant suites at a small desk size (4x4 antennas,
/// 2 RF chains), printing one line with the residual per check. Returns true
/// iff every check passes.
bool selfcheck(std::ostream& out,
               SelfcheckFault fault = SelfcheckFault::none);

}  // namespace hbtrain
