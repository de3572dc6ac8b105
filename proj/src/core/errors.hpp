#pragma once

#include <stdexcept>
#include <string>

namespace mhla {

// Bad user input: malformed documents, schema violations, infeasible requests.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Broken internal invariant; indicates a bug, not bad input.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace mhla
