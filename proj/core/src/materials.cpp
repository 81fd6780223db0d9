#include "lram/materials.hpp"

#include <cmath>

#include "lram/errors.hpp"

namespace lram {

void MaterialPhase::validate() const {
    if (!(rho >= 0.0) || !(bulk > 0.0) || !(shear > 0.0) || !(mu >= 0.0)) {
        throw Error(ErrorKind::InvalidMaterial, "phase '" + name + "' violates rho>=0, K>0, G>0, mu>=0");
    }
}

namespace phases {
MaterialPhase epoxy() { return {"epoxy", 1180.0, 5.49e9, 1.59e9, 0.0}; }
MaterialPhase steel() { return {"steel", 7780.0, 1.72e11, 7.96e10, 0.0}; }
MaterialPhase silicone_rubber() { return {"silicone_rubber", 1300.0, 0.63e6, 0.04e6, 0.0}; }
}  // namespace phases

MaterialRegistry MaterialRegistry::builtin() {
    MaterialRegistry r;
    r.add(phases::epoxy());
    r.add(phases::steel());
    r.add(phases::silicone_rubber());
    return r;
}

void MaterialRegistry::add(MaterialPhase phase) {
    phase.validate();
    for (auto& p : phases_) {
        if (p.name == phase.name) {
            p = std::move(phase);
            return;
        }
    }
    phases_.push_back(std::move(phase));
}

std::optional<MaterialPhase> MaterialRegistry::find(std::string_view name) const {
    for (const auto& p : phases_) {
        if (p.name == name) return p;
    }
    return std::nullopt;
}

const MaterialPhase& MaterialRegistry::get(std::string_view name) const {
    for (const auto& p : phases_) {
        if (p.name == name) return p;
    }
    throw Error(ErrorKind::InvalidMaterial, "unknown material '" + std::string(name) + "'");
}

Voigt3 plane_strain_stiffness(double bulk, double shear) {
    const double c11 = bulk + 4.0 * shear / 3.0;
    const double c12 = bulk - 2.0 * shear / 3.0;
    Voigt3 c;
    c << c11, c12, 0.0,
         c12, c11, 0.0,
         0.0, 0.0, shear;
    return c;
}

Voigt3 deviatoric_viscosity(double mu) {
    Voigt3 eta;
    eta << 4.0 / 3.0, -2.0 / 3.0, 0.0,
           -2.0 / 3.0, 4.0 / 3.0, 0.0,
           0.0, 0.0, 1.0;
    return mu * eta;
}

TensorPair isotropic_tensors(const MaterialPhase& phase) {
    phase.validate();
    return {plane_strain_stiffness(phase.bulk, phase.shear), deviatoric_viscosity(phase.mu)};
}

Interpolated interpolate(double chi, const InterpolationScheme& s) {
    if (!(chi >= 0.0 && chi <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "characteristic value outside [0, 1]");
    }
    if (!(s.exponent > 0.0) || s.dense < 0.0 || s.soft < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "interpolation needs n > 0 and non-negative phases");
    }
    const double inv_n = 1.0 / s.exponent;
    if (chi == 0.0 || chi == 1.0) {
        // Exact endpoint values; the derivative still follows the general formula.
        const double base = chi == 1.0 ? std::pow(s.dense, inv_n) : std::pow(s.soft, inv_n);
        const double d = s.exponent * std::pow(base, s.exponent - 1.0) *
                         (std::pow(s.dense, inv_n) - std::pow(s.soft, inv_n));
        return {chi == 1.0 ? s.dense : s.soft, d};
    }
    const double root_dense = std::pow(s.dense, inv_n);
    const double root_soft = std::pow(s.soft, inv_n);
    const double base = chi * root_dense + (1.0 - chi) * root_soft;
    const double value = std::pow(base, s.exponent);
    // n * h^((n-1)/n) * (h+^(1/n) - h-^(1/n)), written through the base to stay finite at h = 0.
    const double derivative = s.exponent * std::pow(base, s.exponent - 1.0) * (root_dense - root_soft);
    return {value, derivative};
}

}  // namespace lram
