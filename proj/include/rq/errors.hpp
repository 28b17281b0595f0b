#pragma once

#include <stdexcept>
#include <string>

namespace rq {

// Error taxonomy mirrors the CLI exit codes: input 2, capacity 3, numeric 4.
// Anything else escaping to main() is an internal error (5).

struct input_error : std::runtime_error {
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a computation would exceed a configured budget (ball nodes,
// sample count, enumeration size).  Never a silently wrong answer.
struct capacity_error : std::runtime_error {
  explicit capacity_error(const std::string& what) : std::runtime_error(what) {}
};

struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rq
