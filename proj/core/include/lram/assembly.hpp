#pragma once

#include <vector>

#include "lram/grid.hpp"
#include "lram/quad4.hpp"
#include "lram/types.hpp"

namespace lram {

// Constitutive data sampled at every Gauss point (index 4*e + q).
struct MaterialField {
    std::vector<double> rho;
    std::vector<Voigt3> stiffness;
    std::vector<Voigt3> viscosity;

    std::size_t size() const { return rho.size(); }
    static MaterialField uniform(const StructuredGrid& grid, double rho,
                                 const Voigt3& stiffness, const Voigt3& viscosity);
};

struct SystemMatrices {
    SpMat M;
    SpMat C;
    SpMat K;
};

struct AssemblyOptions {
    bool mass = true;
    bool damping = true;
    bool stiffness = true;
};

SystemMatrices assemble(const StructuredGrid& grid, const MaterialField& field,
                        const AssemblyOptions& options = {});

// Element-level pieces, exposed for sensitivity evaluation and tests.
quad4::Matrix8 element_stiffness(const quad4::RectangleKernel& kernel,
                                 const std::array<Voigt3, 4>& stiffness);
quad4::Matrix8 element_mass(const quad4::RectangleKernel& kernel,
                            const std::array<double, 4>& rho);

}  // namespace lram
