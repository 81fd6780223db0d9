#include "lram/grid.hpp"

#include "lram/errors.hpp"

namespace lram {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::InvalidMaterial: return "invalid-material";
        case ErrorKind::MeshIncompatibility: return "mesh-incompatibility";
        case ErrorKind::ConstraintError: return "constraint-error";
        case ErrorKind::SolverFailure: return "solver-failure";
        case ErrorKind::NoRelevantMode: return "no-relevant-mode";
        case ErrorKind::StateError: return "state-error";
        case ErrorKind::Feasibility: return "feasibility-error";
        case ErrorKind::PoleError: return "pole-error";
        case ErrorKind::ResonanceSingularity: return "resonance-singularity";
        case ErrorKind::ConfigError: return "config-error";
    }
    return "error";
}

std::array<int, 4> StructuredGrid::element_nodes(int e) const {
    const int i = e % nx;
    const int j = e / nx;
    return {node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)};
}

std::array<int, 8> StructuredGrid::element_dofs(int e) const {
    const auto en = element_nodes(e);
    std::array<int, 8> dofs{};
    for (int a = 0; a < 4; ++a) {
        dofs[2 * a] = 2 * en[a];
        dofs[2 * a + 1] = 2 * en[a] + 1;
    }
    return dofs;
}

StructuredGrid build_grid(int nx, int ny, double cell_size) {
    return build_grid(nx, ny, cell_size, cell_size);
}

StructuredGrid build_grid(int nx, int ny, double lx, double ly) {
    if (nx < 2 || ny < 2) {
        throw Error(ErrorKind::InvalidArgument, "grid needs at least 2x2 elements");
    }
    if (!(lx > 0.0) || !(ly > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "grid dimensions must be positive");
    }
    StructuredGrid g;
    g.nx = nx;
    g.ny = ny;
    g.lx = lx;
    g.ly = ly;
    g.nodes.reserve(g.node_count());
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            g.nodes.emplace_back(lx * i / nx, ly * j / ny);
        }
    }
    for (int j = 0; j <= ny; ++j) {
        g.left.push_back(g.node(0, j));
        g.right.push_back(g.node(nx, j));
    }
    for (int i = 0; i <= nx; ++i) {
        g.bottom.push_back(g.node(i, 0));
        g.top.push_back(g.node(i, ny));
    }
    g.corners = {g.node(0, 0), g.node(nx, 0), g.node(nx, ny), g.node(0, ny)};
    // Volume average of y over the rectangle.
    g.centroid = Eigen::Vector2d(0.5 * lx, 0.5 * ly);
    return g;
}

}  // namespace lram
