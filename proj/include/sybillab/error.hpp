#pragma once

#include <stdexcept>
#include <string>

namespace sybillab {

/// Raised when a caller-supplied argument violates an operation's contract.
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised on unreadable, unwritable, or malformed files.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a well-formed request cannot be completed (e.g. candidate
/// attack edges exhausted).
class RuntimeFailure : public std::runtime_error {
 public:
  explicit RuntimeFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sybillab
