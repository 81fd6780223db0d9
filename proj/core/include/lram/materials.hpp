#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lram/types.hpp"

namespace lram {

// Isotropic Kelvin-Voigt phase. SI units throughout.
struct MaterialPhase {
    std::string name;
    double rho = 0.0;   // kg/m^3
    double bulk = 0.0;  // Pa
    double shear = 0.0; // Pa
    double mu = 0.0;    // Pa*s, deviatoric viscosity

    double p_wave_modulus() const { return bulk + 4.0 * shear / 3.0; }
    void validate() const;
};

struct AirProperties {
    double rho = 1.2;    // kg/m^3
    double speed = 344.0; // m/s
};

// Table of the reference phases: epoxy, steel, silicone rubber.
namespace phases {
MaterialPhase epoxy();
MaterialPhase steel();
MaterialPhase silicone_rubber();
}  // namespace phases

class MaterialRegistry {
public:
    MaterialRegistry() = default;
    static MaterialRegistry builtin();

    void add(MaterialPhase phase);
    const MaterialPhase& get(std::string_view name) const;
    std::optional<MaterialPhase> find(std::string_view name) const;
    const std::vector<MaterialPhase>& all() const { return phases_; }

private:
    std::vector<MaterialPhase> phases_;
};

struct TensorPair {
    Voigt3 stiffness;  // Pa
    Voigt3 viscosity;  // Pa*s
};

// Plane-strain restriction of C = K I(x)I + 2G Idev and eta = 2 mu Idev.
Voigt3 plane_strain_stiffness(double bulk, double shear);
Voigt3 deviatoric_viscosity(double mu);
TensorPair isotropic_tensors(const MaterialPhase& phase);

// h(chi) = [chi h+^(1/n) + (1 - chi) h-^(1/n)]^n
struct InterpolationScheme {
    double exponent = 2.0;
    double dense = 1.0;
    double soft = 0.0;
};

struct Interpolated {
    double value;
    double derivative;
};

Interpolated interpolate(double chi, const InterpolationScheme& scheme);

}  // namespace lram
