#include "lram/assembly.hpp"

#include <Eigen/Eigenvalues>

#include "lram/errors.hpp"

namespace lram {

namespace {

bool is_psd(const Voigt3& t) {
    if (!t.allFinite()) return false;
    if ((t - t.transpose()).norm() > 1e-10 * (1.0 + t.norm())) return false;
    Eigen::SelfAdjointEigenSolver<Voigt3> es(t, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -1e-12 * (1.0 + t.norm());
}

void check_field(const StructuredGrid& grid, const MaterialField& f) {
    const auto n = static_cast<std::size_t>(grid.gauss_count());
    if (f.rho.size() != n || f.stiffness.size() != n || f.viscosity.size() != n) {
        throw Error(ErrorKind::InvalidArgument, "material field must hold 4 values per element");
    }
    for (std::size_t g = 0; g < n; ++g) {
        if (!(f.rho[g] >= 0.0)) {
            throw Error(ErrorKind::InvalidMaterial, "negative density at Gauss point " + std::to_string(g));
        }
        if (!is_psd(f.stiffness[g]) || !is_psd(f.viscosity[g])) {
            throw Error(ErrorKind::InvalidMaterial,
                        "constitutive tensor not symmetric PSD at Gauss point " + std::to_string(g));
        }
    }
}

}  // namespace

MaterialField MaterialField::uniform(const StructuredGrid& grid, double rho, const Voigt3& stiffness,
                                     const Voigt3& viscosity) {
    const auto n = static_cast<std::size_t>(grid.gauss_count());
    MaterialField f;
    f.rho.assign(n, rho);
    f.stiffness.assign(n, stiffness);
    f.viscosity.assign(n, viscosity);
    return f;
}

quad4::Matrix8 element_stiffness(const quad4::RectangleKernel& kernel,
                                 const std::array<Voigt3, 4>& stiffness) {
    quad4::Matrix8 ke = quad4::Matrix8::Zero();
    for (int q = 0; q < quad4::kGaussPoints; ++q) {
        ke.noalias() += kernel.weight * kernel.B[q].transpose() * stiffness[q] * kernel.B[q];
    }
    return ke;
}

quad4::Matrix8 element_mass(const quad4::RectangleKernel& kernel, const std::array<double, 4>& rho) {
    quad4::Matrix8 me = quad4::Matrix8::Zero();
    for (int q = 0; q < quad4::kGaussPoints; ++q) {
        me.noalias() += (kernel.weight * rho[q]) * kernel.N[q].transpose() * kernel.N[q];
    }
    return me;
}

SystemMatrices assemble(const StructuredGrid& grid, const MaterialField& field,
                        const AssemblyOptions& options) {
    check_field(grid, field);
    const auto kernel = quad4::make_kernel(grid.hx(), grid.hy());
    const int ndof = grid.dof_count();
    const int ne = grid.element_count();

    using Triplets = std::vector<Eigen::Triplet<double>>;
    Triplets tm, tc, tk;
    if (options.mass) tm.reserve(64 * ne);
    if (options.stiffness) tk.reserve(64 * ne);
    if (options.damping) tc.reserve(64 * ne);

    auto scatter = [](Triplets& t, const std::array<int, 8>& dofs, const quad4::Matrix8& m) {
        for (int a = 0; a < 8; ++a) {
            for (int b = 0; b < 8; ++b) {
                t.emplace_back(dofs[a], dofs[b], m(a, b));
            }
        }
    };

    for (int e = 0; e < ne; ++e) {
        const auto dofs = grid.element_dofs(e);
        const int g0 = 4 * e;
        if (options.mass) {
            const std::array<double, 4> rho = {field.rho[g0], field.rho[g0 + 1], field.rho[g0 + 2],
                                               field.rho[g0 + 3]};
            scatter(tm, dofs, element_mass(kernel, rho));
        }
        if (options.stiffness) {
            const std::array<Voigt3, 4> c = {field.stiffness[g0], field.stiffness[g0 + 1],
                                             field.stiffness[g0 + 2], field.stiffness[g0 + 3]};
            scatter(tk, dofs, element_stiffness(kernel, c));
        }
        if (options.damping) {
            const std::array<Voigt3, 4> eta = {field.viscosity[g0], field.viscosity[g0 + 1],
                                               field.viscosity[g0 + 2], field.viscosity[g0 + 3]};
            if (!eta[0].isZero(0.0) || !eta[1].isZero(0.0) || !eta[2].isZero(0.0) ||
                !eta[3].isZero(0.0)) {
                scatter(tc, dofs, element_stiffness(kernel, eta));
            }
        }
    }

    SystemMatrices out;
    out.M.resize(ndof, ndof);
    out.C.resize(ndof, ndof);
    out.K.resize(ndof, ndof);
    out.M.setFromTriplets(tm.begin(), tm.end());
    out.C.setFromTriplets(tc.begin(), tc.end());
    out.K.setFromTriplets(tk.begin(), tk.end());
    return out;
}

}  // namespace lram
