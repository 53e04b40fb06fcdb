#ifndef SIMREG_ERRORS_HPP
#define SIMREG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace simreg {

// Malformed or inconsistent input data (files, id mismatches, invalid values).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (non-convergence, separation, non-PSD matrices).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace simreg

#endif
