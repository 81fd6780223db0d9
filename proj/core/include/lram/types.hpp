#pragma once

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace lram {

using Complex = std::complex<double>;
using SpMat = Eigen::SparseMatrix<double>;
using SpMatC = Eigen::SparseMatrix<Complex>;
using Vec = Eigen::VectorXd;
using VecC = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using MatC = Eigen::MatrixXcd;

// Plane-strain Voigt ordering: (xx, yy, xy) with engineering shear strain.
using Voigt3 = Eigen::Matrix3d;

constexpr double kPi = 3.14159265358979323846;

inline double hz_to_rad(double f_hz) { return 2.0 * kPi * f_hz; }
inline double rad_to_hz(double omega) { return omega / (2.0 * kPi); }

}  // namespace lram
