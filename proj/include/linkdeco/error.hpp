#pragma once

#include <stdexcept>
#include <string>

namespace linkdeco {

/// Malformed input: unparseable URLs, trace lines, rule files, CLI files.
/// Maps to exit code 1 in the command-line tool.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that is well-formed but breaks a documented invariant (dangling
/// request references, non-monotone sequence numbers, version mismatches).
/// Maps to exit code 2 in the command-line tool.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace linkdeco
