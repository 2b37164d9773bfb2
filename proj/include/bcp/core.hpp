#ifndef BCP_CORE_HPP
#define BCP_CORE_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bcp {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The input is well formed but the mathematics refuses it: the problem is
/// not elliptic, not symmetric, the zeta function is undefined, lambda sits
/// on the spectrum, and so on. The CLI maps these to exit code 1.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed input (files, shapes, flags). The CLI maps these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace bcp

#endif  // BCP_CORE_HPP
