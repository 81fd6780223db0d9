#pragma once

#include <string>
#include <vector>

#include "lram/assembly.hpp"
#include "lram/constraints.hpp"
#include "lram/grid.hpp"
#include "lram/types.hpp"

namespace lram {

// Homogenized record of an RVE. Matrices carry volume-average normalization,
// so rho_eff(omega) below is a density in kg/m^3.
struct EffectiveMaterial {
    double rho_bar = 0.0;                    // kg/m^3
    Voigt3 stiffness = Voigt3::Zero();       // C_eff, Pa
    Voigt3 viscosity = Voigt3::Zero();       // eta_eff, Pa*s
    Mat Q;                                   // 2 x m, r^T M phi / sqrt(area), phi M-normalized
    Vec omega2;                              // m, rad^2/s^2
    Mat omega_d;                             // m x m, rad/s
    Vec mode_frequency_hz;                   // every computed mode, for the report
    Mat mode_coupling;                       // 2 x all computed modes
    std::vector<bool> mode_relevant;
    double coupling_ratio = 0.0;             // |Omega_D(relevant, other)| / |Omega_D(relevant, relevant)|
    int mode_count() const { return static_cast<int>(omega2.size()); }
};

struct QuasiStatic {
    Voigt3 stiffness = Voigt3::Zero();
    Voigt3 viscosity = Voigt3::Zero();
};

// Periodic microfluctuation solve; constraints must remove rigid motion.
QuasiStatic quasi_static(const StructuredGrid& grid, const SystemMatrices& sys,
                         const ConstraintOperators& ops);

struct InertialOptions {
    double cutoff_hz = 6000.0;  // keep relevant modes below this
    int initial_modes = 24;
    int max_modes = 400;
    double delta_tol = 1e-3;
    // Throw NoRelevantMode when nothing couples; off for cells without resonators.
    bool require_relevant = true;
};

struct InertialReduction {
    double rho_bar = 0.0;
    Mat Q;
    Vec omega2;
    Mat omega_d;
    Vec all_frequency_hz;
    Mat all_coupling;
    std::vector<bool> relevant;
    double coupling_ratio = 0.0;
};

InertialReduction inertial_reduction(const StructuredGrid& grid, const SystemMatrices& sys,
                                     const ConstraintOperators& ops, const InertialOptions& options = {});

// Periodic + pinned corner, full 2D motion.
EffectiveMaterial homogenize(const StructuredGrid& grid, const MaterialField& field,
                             const InertialOptions& options = {});

// rho_eff(w) = rho_bar I + w^2 Q (Omega^2 - w^2 I - i w Omega_D)^-1 Q^T
// (time dependence exp(-i w t), so dissipation gives Im rho >= 0).
Eigen::Matrix2cd effective_density(const EffectiveMaterial& em, double omega);

// Single-mode / generic constructor for toy media and tests.
EffectiveMaterial make_effective(double rho_bar, const Voigt3& stiffness, const Voigt3& viscosity,
                                 const Mat& Q, const Vec& omega2, const Mat& omega_d);

std::string format_report(const EffectiveMaterial& em);
EffectiveMaterial parse_report(const std::string& text);

}  // namespace lram
