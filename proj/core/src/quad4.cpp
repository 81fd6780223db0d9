#include "lram/quad4.hpp"

#include <cmath>

namespace lram::quad4 {

std::array<Eigen::Vector2d, kGaussPoints> gauss_points() {
    const double g = 1.0 / std::sqrt(3.0);
    return {Eigen::Vector2d(-g, -g), Eigen::Vector2d(g, -g), Eigen::Vector2d(-g, g),
            Eigen::Vector2d(g, g)};
}

RectangleKernel make_kernel(double hx, double hy) {
    static constexpr double xi_a[4] = {-1.0, 1.0, 1.0, -1.0};
    static constexpr double eta_a[4] = {-1.0, -1.0, 1.0, 1.0};

    RectangleKernel k;
    k.hx = hx;
    k.hy = hy;
    k.weight = 0.25 * hx * hy;
    const auto gp = gauss_points();
    for (int q = 0; q < kGaussPoints; ++q) {
        const double xi = gp[q].x();
        const double eta = gp[q].y();
        k.N[q].setZero();
        k.B[q].setZero();
        for (int a = 0; a < 4; ++a) {
            const double n = 0.25 * (1.0 + xi_a[a] * xi) * (1.0 + eta_a[a] * eta);
            const double dndx = 0.25 * xi_a[a] * (1.0 + eta_a[a] * eta) * (2.0 / hx);
            const double dndy = 0.25 * eta_a[a] * (1.0 + xi_a[a] * xi) * (2.0 / hy);
            k.N[q](0, 2 * a) = n;
            k.N[q](1, 2 * a + 1) = n;
            k.B[q](0, 2 * a) = dndx;
            k.B[q](1, 2 * a + 1) = dndy;
            k.B[q](2, 2 * a) = dndy;
            k.B[q](2, 2 * a + 1) = dndx;
        }
        k.offset[q] = Eigen::Vector2d(0.5 * hx * (1.0 + xi), 0.5 * hy * (1.0 + eta));
    }
    return k;
}

}  // namespace lram::quad4
