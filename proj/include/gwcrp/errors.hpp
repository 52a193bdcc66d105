#ifndef GWCRP_ERRORS_HPP
#define GWCRP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gwcrp {

// Bad arguments or malformed input files. Maps to exit code 2 in the CLI.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Data that parses but cannot be fit (empty hazard piece, id mismatch, ...).
// Also exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: non-finite values, non-SPD covariance, singular system.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Newton iteration did not converge.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gwcrp

#endif
