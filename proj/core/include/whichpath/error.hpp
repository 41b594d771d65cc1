#pragma once

#include <stdexcept>
#include <string>

namespace whichpath {

/// Invalid input or a violated precondition (malformed geometry, bad config).
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical procedure failed to converge or an oracle check diverged.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem or stream failure.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace whichpath
