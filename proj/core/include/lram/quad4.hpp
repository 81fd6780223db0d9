#pragma once

#include <array>

#include <Eigen/Dense>

namespace lram::quad4 {

using Matrix38 = Eigen::Matrix<double, 3, 8>;
using Matrix28 = Eigen::Matrix<double, 2, 8>;
using Matrix8 = Eigen::Matrix<double, 8, 8>;

// 2x2 Gauss rule on the reference square, ordered (-,-), (+,-), (-,+), (+,+).
constexpr int kGaussPoints = 4;
std::array<Eigen::Vector2d, kGaussPoints> gauss_points();

// Kinematic operators of a hx-by-hy rectangle at each Gauss point. Every
// element of a structured grid shares them, so they are computed once.
struct RectangleKernel {
    double hx = 0.0;
    double hy = 0.0;
    double weight = 0.0;  // Gauss weight times Jacobian determinant (= hx*hy/4)
    std::array<Matrix28, kGaussPoints> N;
    std::array<Matrix38, kGaussPoints> B;
    // Physical offset of each Gauss point from the element's bottom-left node.
    std::array<Eigen::Vector2d, kGaussPoints> offset;
};

RectangleKernel make_kernel(double hx, double hy);

}  // namespace lram::quad4
