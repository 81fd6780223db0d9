#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lram/assembly.hpp"
#include "lram/grid.hpp"
#include "lram/materials.hpp"

namespace lram {

// Bilinear shape values of the element's four nodes at Gauss point q.
std::array<double, 4> gauss_shape_weights(int q);

enum class Phase : std::uint8_t { Frame, Dense, Soft };

// Three-phase unit cell: a fixed frame ring around a design domain where the
// level set picks dense (phi >= 0) or soft (phi < 0) material.
struct RveLayout {
    StructuredGrid grid;
    int frame_x = 1;  // frame thickness in elements, left/right sides
    int frame_y = 1;  // bottom/top sides
    Vec phi;          // nodal level set, (nx+1)(ny+1)

    bool frame_element(int e) const;
    // Nodes touched by at least one design element; the only ones phi may change on.
    std::vector<bool> design_nodes() const;
    // Nodes of frame elements, ascending.
    std::vector<int> frame_nodes() const;
    // Level set interpolated at Gauss point q of element e.
    double phi_at(int e, int q) const;
};

// Frame thickness = round(fraction * n) elements per side, at least one.
RveLayout make_layout(const StructuredGrid& grid, double frame_fraction, double initial_phi = 1.0);

std::vector<Phase> gauss_phases(const RveLayout& layout);

struct PhaseSet {
    MaterialPhase frame = phases::epoxy();
    MaterialPhase dense = phases::steel();
    MaterialPhase soft = phases::silicone_rubber();
};

// Multipliers applied inside the optimizer; identity for true properties.
struct PropertyScaling {
    double frame_stiffness = 1.0;
    double soft_density = 1.0;
};

// Per-phase properties after scaling.
struct ScaledPhases {
    MaterialPhase frame, dense, soft;
};
ScaledPhases scale_phases(const PhaseSet& set, const PropertyScaling& scaling);

MaterialField material_field(const StructuredGrid& grid, const std::vector<Phase>& phases,
                             const ScaledPhases& props, bool with_viscosity = true);

struct VolumeFractions {
    double frame = 0.0;
    double dense = 0.0;
    double soft = 0.0;
};
VolumeFractions volume_fractions(const std::vector<Phase>& phases);

}  // namespace lram
