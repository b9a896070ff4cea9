#pragma once

#include <stdexcept>
#include <string>

namespace srn {

// Thrown when a caller violates an operation's precondition (bad sizes,
// non-normalized states, unknown ids).  Protocol-level outcomes (loss,
// aborts, decode failures) are values, never exceptions.
struct ContractError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace srn
