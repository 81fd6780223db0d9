#include "lram/rve.hpp"

#include <algorithm>
#include <cmath>

#include "lram/errors.hpp"
#include "lram/quad4.hpp"

namespace lram {

bool RveLayout::frame_element(int e) const {
    const int i = e % grid.nx;
    const int j = e / grid.nx;
    return i < frame_x || i >= grid.nx - frame_x || j < frame_y || j >= grid.ny - frame_y;
}

std::vector<bool> RveLayout::design_nodes() const {
    std::vector<bool> mask(grid.node_count(), false);
    for (int e = 0; e < grid.element_count(); ++e) {
        if (frame_element(e)) continue;
        for (int n : grid.element_nodes(e)) mask[n] = true;
    }
    return mask;
}

std::vector<int> RveLayout::frame_nodes() const {
    std::vector<bool> mask(grid.node_count(), false);
    for (int e = 0; e < grid.element_count(); ++e) {
        if (!frame_element(e)) continue;
        for (int n : grid.element_nodes(e)) mask[n] = true;
    }
    std::vector<int> out;
    for (int n = 0; n < grid.node_count(); ++n) {
        if (mask[n]) out.push_back(n);
    }
    return out;
}

std::array<double, 4> gauss_shape_weights(int q) {
    static const auto gp = quad4::gauss_points();
    const double xi = gp[q].x();
    const double eta = gp[q].y();
    return {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
            0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta)};
}

double RveLayout::phi_at(int e, int q) const {
    const auto nodes = grid.element_nodes(e);
    const auto w = gauss_shape_weights(q);
    double v = 0.0;
    for (int a = 0; a < 4; ++a) v += w[a] * phi(nodes[a]);
    return v;
}

RveLayout make_layout(const StructuredGrid& grid, double frame_fraction, double initial_phi) {
    if (!(frame_fraction >= 0.0 && frame_fraction < 0.5)) {
        throw Error(ErrorKind::InvalidArgument, "frame fraction must lie in [0, 0.5)");
    }
    RveLayout layout;
    layout.grid = grid;
    layout.frame_x = std::max(1, static_cast<int>(std::lround(frame_fraction * grid.nx)));
    layout.frame_y = std::max(1, static_cast<int>(std::lround(frame_fraction * grid.ny)));
    if (2 * layout.frame_x >= grid.nx || 2 * layout.frame_y >= grid.ny) {
        throw Error(ErrorKind::InvalidArgument, "grid too coarse for the frame; no design domain left");
    }
    layout.phi = Vec::Constant(grid.node_count(), initial_phi);
    return layout;
}

std::vector<Phase> gauss_phases(const RveLayout& layout) {
    const auto& g = layout.grid;
    std::vector<Phase> out(g.gauss_count());
    for (int e = 0; e < g.element_count(); ++e) {
        const bool frame = layout.frame_element(e);
        for (int q = 0; q < 4; ++q) {
            out[4 * e + q] = frame ? Phase::Frame
                                   : (layout.phi_at(e, q) >= 0.0 ? Phase::Dense : Phase::Soft);
        }
    }
    return out;
}

ScaledPhases scale_phases(const PhaseSet& set, const PropertyScaling& scaling) {
    ScaledPhases s{set.frame, set.dense, set.soft};
    s.frame.bulk *= scaling.frame_stiffness;
    s.frame.shear *= scaling.frame_stiffness;
    s.soft.rho *= scaling.soft_density;
    return s;
}

MaterialField material_field(const StructuredGrid& grid, const std::vector<Phase>& phases,
                             const ScaledPhases& props, bool with_viscosity) {
    if (static_cast<int>(phases.size()) != grid.gauss_count()) {
        throw Error(ErrorKind::InvalidArgument, "phase field does not match the grid");
    }
    const MaterialPhase* table[3] = {&props.frame, &props.dense, &props.soft};
    TensorPair t[3];
    for (int p = 0; p < 3; ++p) {
        t[p] = isotropic_tensors(*table[p]);
        if (!with_viscosity) t[p].viscosity.setZero();
    }
    MaterialField f;
    f.rho.resize(phases.size());
    f.stiffness.resize(phases.size());
    f.viscosity.resize(phases.size());
    for (std::size_t g = 0; g < phases.size(); ++g) {
        const int p = static_cast<int>(phases[g]);
        f.rho[g] = table[p]->rho;
        f.stiffness[g] = t[p].stiffness;
        f.viscosity[g] = t[p].viscosity;
    }
    return f;
}

VolumeFractions volume_fractions(const std::vector<Phase>& phases) {
    VolumeFractions v;
    if (phases.empty()) return v;
    for (Phase p : phases) {
        if (p == Phase::Frame) v.frame += 1.0;
        else if (p == Phase::Dense) v.dense += 1.0;
        else v.soft += 1.0;
    }
    const double n = static_cast<double>(phases.size());
    v.frame /= n;
    v.dense /= n;
    v.soft /= n;
    return v;
}

}  // namespace lram
