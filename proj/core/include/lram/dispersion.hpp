#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lram/assembly.hpp"
#include "lram/grid.hpp"
#include "lram/homogenize.hpp"

namespace lram {

// Normalized wavenumber k l / pi per frequency sample.
struct DispersionCurve {
    std::vector<double> f_hz;
    std::vector<Complex> k_norm;
    std::string branch = "longitudinal";
};

// Uniform samples over [f_min, f_max]; a sample sitting on an undamped pole
// of rho_xx is moved up by `nudge_hz`.
std::vector<double> sample_frequencies(double f_min_hz, double f_max_hz, int count,
                                       const EffectiveMaterial* em = nullptr, double nudge_hz = 0.1);
// Same nudge for an arbitrary list; a no-op for damped media.
std::vector<double> nudge_off_poles(std::vector<double> f_hz, const EffectiveMaterial& em, double nudge_hz = 0.1);

// kappa = w sqrt(rho_xx / (C11 - i w eta11)), Im kappa >= 0.
DispersionCurve effective_dispersion(const EffectiveMaterial& em, const std::vector<double>& f_hz,
                                     double cell_size);

struct Bandgap {
    double lower_hz = 0.0;
    double upper_hz = 0.0;
    double width() const { return upper_hz - lower_hz; }
};

// Undamped intervals where rho_xx < 0: each opens at an x-coupled resonance
// and closes at the next sign change. Slivers narrower than
// min_relative_width * lower edge (weakly coupled modes) are dropped.
std::vector<Bandgap> effective_bandgaps(const EffectiveMaterial& em, double min_relative_width = 1e-3);

struct BlochBranches {
    std::vector<double> k_norm;
    Mat f_hz;             // samples x branches
    Mat x_participation;  // x share of the kinetic energy
};

// Bloch-Floquet along x (phase exp(i k lx)), periodic in y, undamped.
BlochBranches bloch_oracle(const StructuredGrid& grid, const MaterialField& field,
                           const std::vector<double>& k_norm, int branches = 12);

// First gap of the x-polarized branches: lower = max over k of the lowest,
// upper = min over k > 0 of the second.
std::optional<Bandgap> bloch_bandgap(const BlochBranches& b, double min_participation = 0.75);

std::string dispersion_csv(const DispersionCurve& c);
std::string bloch_csv(const BlochBranches& b);

}  // namespace lram
