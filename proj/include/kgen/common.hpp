#pragma once

#include <Eigen/Dense>

#include <numbers>
#include <stdexcept>
#include <string>

namespace kgen {

// Small vectors live on the stack: d is 2 or 3.
template <typename Scalar>
using VelocityT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
template <typename Scalar>
using TensorT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

using Velocity = VelocityT<double>;
using Tensor = TensorT<double>;

inline constexpr double pi = std::numbers::pi;

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

void warn(const std::string& message);
void set_warnings_enabled(bool on);

}  // namespace kgen
