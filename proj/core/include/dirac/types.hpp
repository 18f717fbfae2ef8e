#pragma once

#include <complex>

#include <Eigen/Dense>

namespace dirac {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Spatial vectors always carry three components; 1+1D code reads only x().
using Vec3 = Eigen::Vector3d;

inline constexpr double pi = 3.14159265358979323846;

} // namespace dirac
