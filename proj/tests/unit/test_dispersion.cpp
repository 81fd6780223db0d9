#include <gtest/gtest.h>

#include <cmath>

#include "lram/dispersion.hpp"
#include "lram/errors.hpp"
#include "lram/materials.hpp"

using namespace lram;

namespace {

EffectiveMaterial epoxy_medium(double mu = 0.0) {
    const auto t = isotropic_tensors({"epoxy", 1180.0, 5.49e9, 1.59e9, mu});
    return make_effective(1180.0, t.stiffness, t.viscosity, Mat(2, 0), Vec(0), Mat(0, 0));
}

// rho_bar = 1 with half of it on a resonator at 1 rad/s.
EffectiveMaterial toy(double damping = 0.0) {
    Mat Q(2, 1);
    Q << std::sqrt(0.5), 0.0;
    Vec w2(1);
    w2 << 1.0;
    Mat od(1, 1);
    od << damping;
    return make_effective(1.0, Voigt3::Identity(), Voigt3::Identity() * damping, Q, w2, od);
}

MaterialField epoxy_field(const StructuredGrid& g) {
    const auto t = isotropic_tensors(phases::epoxy());
    return MaterialField::uniform(g, 1180.0, t.stiffness, t.viscosity);
}

}  // namespace

TEST(Dispersion, HomogeneousEpoxyIsLinear) {
    const auto em = epoxy_medium();
    const double c = std::sqrt(7.61e9 / 1180.0);
    EXPECT_NEAR(c, 2540.0, 1.0);
    const auto f = sample_frequencies(0.0, 3000.0, 31);
    const auto d = effective_dispersion(em, f, 0.01);
    EXPECT_EQ(d.k_norm.front(), Complex(0.0, 0.0));
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double k = hz_to_rad(f[i]) / c * 0.01 / kPi;
        EXPECT_NEAR(d.k_norm[i].real(), k, 1e-12 * std::max(k, 1e-12));
        EXPECT_LE(std::abs(d.k_norm[i].imag()), 1e-8 * std::max(std::abs(d.k_norm[i]), 1e-300));
    }
}

TEST(Dispersion, ToyMediumGapWhereDensityIsNegative) {
    const auto em = toy();
    const auto gaps = effective_bandgaps(em);
    ASSERT_EQ(gaps.size(), 1u);
    EXPECT_NEAR(gaps[0].lower_hz, rad_to_hz(1.0), 1e-12);
    EXPECT_NEAR(gaps[0].upper_hz, rad_to_hz(std::sqrt(2.0)), 1e-10);
    std::vector<double> f;
    for (double w : {0.5, 0.99, 1.01, 1.2, 1.4, 1.42, 2.0}) f.push_back(rad_to_hz(w));
    const auto d = effective_dispersion(em, f, kPi);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double w2 = std::pow(hz_to_rad(f[i]), 2);
        const bool in_gap = w2 > 1.0 && w2 < 2.0;
        if (in_gap) {
            EXPECT_NEAR(d.k_norm[i].real(), 0.0, 1e-12);
            EXPECT_GT(d.k_norm[i].imag(), 0.0);
        } else {
            EXPECT_GT(d.k_norm[i].real(), 0.0);
            EXPECT_NEAR(d.k_norm[i].imag(), 0.0, 1e-12);
        }
    }
}

TEST(Dispersion, ViscosityAttenuatesEverywhere) {
    const auto d = effective_dispersion(toy(0.05), sample_frequencies(0.01, 1.0, 50), 1.0);
    for (std::size_t i = 0; i < d.f_hz.size(); ++i) EXPECT_GT(d.k_norm[i].imag(), 0.0);
    const auto e = effective_dispersion(epoxy_medium(10.0), sample_frequencies(5.0, 3000.0, 20), 0.01);
    for (const auto& k : e.k_norm) EXPECT_GT(k.imag(), 0.0);
}

TEST(Dispersion, PoleSamplesAreNudged) {
    const auto em = toy();
    const double pole = rad_to_hz(1.0);
    const auto f = sample_frequencies(0.0, 2.0 * pole, 3, &em, 1e-3);
    EXPECT_NEAR(f[1], pole + 1e-3, 1e-15);
    EXPECT_NO_THROW(effective_dispersion(em, f, 1.0));
    EXPECT_THROW(sample_frequencies(1.0, 0.5, 3), Error);
    EXPECT_THROW(sample_frequencies(0.0, 1.0, 0), Error);
}

TEST(Bloch, HomogeneousCellLongWaveLimit) {
    const auto g = build_grid(10, 10, 0.01);
    const double c = std::sqrt(7.61e9 / 1180.0);
    const std::vector<double> ks{0.0, 0.05, 0.1, 0.25, -0.25};
    const auto b = bloch_oracle(g, epoxy_field(g), ks, 4);
    EXPECT_NEAR(b.f_hz(0, 0), 0.0, 1e-3);
    for (int s = 1; s < 4; ++s) {
        // Longitudinal branch: the x-polarized one among the lowest two.
        int x = b.x_participation(s, 0) > b.x_participation(s, 1) ? 0 : 1;
        const double kappa = ks[s] * kPi / g.lx;
        EXPECT_NEAR(hz_to_rad(b.f_hz(s, x)), c * kappa, 0.01 * c * kappa) << ks[s];
        EXPECT_GT(b.x_participation(s, x), 0.99);
    }
    // Even in kappa.
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(b.f_hz(4, j), b.f_hz(3, j), 1e-8 * b.f_hz(3, j));
}

TEST(Bloch, GapFromBranches) {
    BlochBranches b;
    b.k_norm = {0.0, 0.5, 1.0};
    b.f_hz.resize(3, 3);
    b.x_participation.resize(3, 3);
    b.f_hz << 0, 50, 300,  //
        40, 60, 320,       //
        90, 100, 310;
    b.x_participation << 0.5, 0.5, 0.5,  //
        1.0, 0.1, 0.9,                   //
        0.95, 0.2, 0.9;
    const auto gap = bloch_bandgap(b);
    ASSERT_TRUE(gap.has_value());
    EXPECT_EQ(gap->lower_hz, 90.0);
    EXPECT_EQ(gap->upper_hz, 310.0);
}

TEST(Dispersion, CsvHeaders) {
    const auto d = effective_dispersion(epoxy_medium(), {100.0}, 0.01);
    EXPECT_EQ(dispersion_csv(d).rfind("f_Hz,Re_k_norm,Im_k_norm\n", 0), 0u);
    BlochBranches b;
    b.k_norm = {0.5};
    b.f_hz = Mat::Constant(1, 2, 10.0);
    b.x_participation = Mat::Zero(1, 2);
    EXPECT_EQ(bloch_csv(b), "k_norm,f1_Hz,f2_Hz\n0.5,10,10\n");
}
