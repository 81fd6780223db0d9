#pragma once

#include <array>
#include <vector>

#include "lram/types.hpp"

namespace lram {

// Structured nx-by-ny grid of bilinear quads spanning [0, lx] x [0, ly].
// Nodes are numbered row-major (x fastest); node n owns DOFs 2n (x) and 2n+1 (y).
struct StructuredGrid {
    int nx = 0;
    int ny = 0;
    double lx = 0.0;
    double ly = 0.0;

    std::vector<Eigen::Vector2d> nodes;
    // Boundary node sets, each ordered along the boundary; corners belong to
    // two sets and to `corners` (bottom-left, bottom-right, top-right, top-left).
    std::vector<int> left, right, bottom, top;
    std::array<int, 4> corners{};
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();

    int node_count() const { return (nx + 1) * (ny + 1); }
    int dof_count() const { return 2 * node_count(); }
    int element_count() const { return nx * ny; }
    int gauss_count() const { return 4 * element_count(); }
    double hx() const { return lx / nx; }
    double hy() const { return ly / ny; }
    double area() const { return lx * ly; }

    int node(int i, int j) const { return j * (nx + 1) + i; }
    int element(int i, int j) const { return j * nx + i; }
    // Counter-clockwise node list of element e starting at its bottom-left corner.
    std::array<int, 4> element_nodes(int e) const;
    std::array<int, 8> element_dofs(int e) const;
};

StructuredGrid build_grid(int nx, int ny, double cell_size);
StructuredGrid build_grid(int nx, int ny, double lx, double ly);

}  // namespace lram
