#pragma once

#include <stdexcept>
#include <string>

namespace codexmine {

/// Bad or inconsistent input: malformed files, invalid parameters, unmet
/// preconditions on user-supplied data. The CLI maps this to exit status 1.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An internal invariant was violated (non-finite codebook, broken
/// partition, ...). The CLI maps this to exit status 2.
class InvariantError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

inline void require_input(bool cond, const std::string& msg) {
  if (!cond) throw InputError(msg);
}

inline void require_invariant(bool cond, const std::string& msg) {
  if (!cond) throw InvariantError(msg);
}

} // namespace codexmine
