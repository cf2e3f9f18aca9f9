#pragma once

#include <stdexcept>
#include <string>

namespace ldade {

/// Raised for invalid inputs and violated preconditions anywhere in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ldade
