#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace msfct {

using Index = Eigen::Index;

template <class T>
using ArrayX = Eigen::Array<T, Eigen::Dynamic, 1>;
template <class T>
using MatrixX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using VectorX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using ArrayXd = ArrayX<double>;
using MatrixXd = MatrixX<double>;

// Error hierarchy. The CLI maps these onto its exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace msfct
