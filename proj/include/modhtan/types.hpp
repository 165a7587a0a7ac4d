#pragma once

#include <Eigen/Dense>

namespace modhtan {

// Extended precision throughout: tanh-shaped outputs near -20 are only
// distinguishable from -1 with a 64-bit mantissa.
using Real = long double;

using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

}  // namespace modhtan
