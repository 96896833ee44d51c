#ifndef BCC_ERRORS_HPP
#define BCC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bcc {

/// Malformed or inconsistent input data (CSV parse failures, alignment
/// problems, constant columns). Carries coordinates in the message where
/// they are known.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical breakdown that no amount of input validation can rule out,
/// e.g. a conditional distribution whose mass vanishes everywhere.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace bcc

#endif
