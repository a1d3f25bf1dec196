#pragma once

// Policy descriptors used on the command line:
//   net:<checkpoint>
//   bag:<checkpoint>,<checkpoint>,...
//   search:<eval>:<depth>     eval is wpc, discdiff, mobility or wpc@<file>
//   hybrid:<d1>;<d2>;<d3>;<d4> one descriptor per default stage
// The descriptor text becomes the policy's name.

#include <string_view>

#include "othello/policy.hpp"

namespace othello {

// Throws InvalidArgument for malformed text; loading errors propagate.
policy::PolicyPtr parse_policy(std::string_view descriptor);

}  // namespace othello
