#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lram/errors.hpp"
#include "lram/materials.hpp"

using namespace lram;

TEST(Materials, EpoxyPWaveModulus) {
    const auto t = isotropic_tensors(phases::epoxy());
    EXPECT_NEAR(t.stiffness(0, 0), 7.61e9, 1.0);
    EXPECT_NEAR(t.stiffness(2, 2), 1.59e9, 1e-6);
    EXPECT_NEAR(t.stiffness(0, 1), 5.49e9 - 2.0 / 3.0 * 1.59e9, 1.0);
    Eigen::SelfAdjointEigenSolver<Voigt3> es(t.stiffness);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
    EXPECT_EQ(t.viscosity.norm(), 0.0);
}

TEST(Materials, DeviatoricViscosity) {
    auto p = phases::silicone_rubber();
    p.mu = 10.0;
    const auto eta = isotropic_tensors(p).viscosity;
    // Pure shear rate: sigma_xy = mu * gamma_dot.
    EXPECT_NEAR((eta * Eigen::Vector3d(0, 0, 1))(2), 10.0, 1e-14);
    EXPECT_NEAR(eta(0, 0), 40.0 / 3.0, 1e-13);
    // Plane-strain hydrostatic rate (1, 1, 0) still has eps_zz = 0, so only the
    // deviatoric part answers: 2 mu (1 - 2/3) = 20/3 on each normal stress.
    const Eigen::Vector3d s = eta * Eigen::Vector3d(1, 1, 0);
    EXPECT_NEAR(s(0), 20.0 / 3.0, 1e-13);
    EXPECT_NEAR(s(1), 20.0 / 3.0, 1e-13);
    Eigen::SelfAdjointEigenSolver<Voigt3> es(eta);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(Materials, RegistryAndAir) {
    const auto reg = MaterialRegistry::builtin();
    EXPECT_EQ(reg.get("steel").rho, 7780.0);
    EXPECT_EQ(reg.get("silicone_rubber").bulk, 0.63e6);
    EXPECT_FALSE(reg.find("wood").has_value());
    try {
        reg.get("wood");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidMaterial);
    }
    const AirProperties air;
    EXPECT_EQ(air.rho, 1.2);
    EXPECT_EQ(air.speed, 344.0);
}

TEST(Materials, InvalidPhasesRejected) {
    MaterialRegistry reg;
    EXPECT_THROW(reg.add({"bad", -1.0, 1.0, 1.0, 0.0}), Error);
    EXPECT_THROW(reg.add({"bad", 1.0, 0.0, 1.0, 0.0}), Error);
    EXPECT_THROW(reg.add({"bad", 1.0, 1.0, 1.0, -0.1}), Error);
}

TEST(Interpolation, ClosedFormValues) {
    const InterpolationScheme s{2.0, 4.0, 1.0};
    EXPECT_DOUBLE_EQ(interpolate(1.0, s).value, 4.0);
    EXPECT_DOUBLE_EQ(interpolate(1.0, s).derivative, 4.0);
    EXPECT_DOUBLE_EQ(interpolate(0.0, s).value, 1.0);
    EXPECT_DOUBLE_EQ(interpolate(0.5, s).value, 2.25);
}

TEST(Interpolation, DerivativeMatchesFiniteDifference) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> chi_d(0.05, 0.95), n_d(0.5, 4.0), h_d(0.1, 100.0);
    for (int t = 0; t < 200; ++t) {
        const InterpolationScheme s{n_d(rng), h_d(rng), h_d(rng)};
        const double chi = chi_d(rng);
        const double h = 1e-6;
        const double fd = (interpolate(chi + h, s).value - interpolate(chi - h, s).value) / (2 * h);
        const double d = interpolate(chi, s).derivative;
        EXPECT_NEAR(d, fd, 1e-6 * std::max(1.0, std::abs(d)));
    }
}

TEST(Interpolation, MonotoneWhenDenseIsLarger) {
    for (double n : {0.5, 1.0, 2.0, 3.0}) {
        const InterpolationScheme s{n, 7.0, 0.5};
        double prev = interpolate(0.0, s).value;
        for (int i = 1; i <= 50; ++i) {
            const double v = interpolate(i / 50.0, s).value;
            EXPECT_GT(v, prev);
            prev = v;
        }
        EXPECT_DOUBLE_EQ(interpolate(1.0, s).value, 7.0);
    }
}

TEST(Interpolation, RejectsOutOfRange) {
    try {
        interpolate(1.5, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
    }
}
