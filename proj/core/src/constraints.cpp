#include "lram/constraints.hpp"

#include <cmath>

#include "lram/errors.hpp"
#include "lram/quad4.hpp"

namespace lram {

namespace {

void check_periodic_pairs(const StructuredGrid& g) {
    const double tol = 1e-12 * std::max(g.lx, g.ly);
    if (g.left.size() != g.right.size() || g.bottom.size() != g.top.size()) {
        throw Error(ErrorKind::MeshIncompatibility, "opposite boundaries differ in node count");
    }
    for (std::size_t k = 0; k < g.left.size(); ++k) {
        if (std::abs(g.nodes[g.left[k]].y() - g.nodes[g.right[k]].y()) > tol) {
            throw Error(ErrorKind::MeshIncompatibility, "left/right periodic pair mismatch");
        }
    }
    for (std::size_t k = 0; k < g.bottom.size(); ++k) {
        if (std::abs(g.nodes[g.bottom[k]].x() - g.nodes[g.top[k]].x()) > tol) {
            throw Error(ErrorKind::MeshIncompatibility, "bottom/top periodic pair mismatch");
        }
    }
}

}  // namespace

ConstraintOperators build_constraints(const StructuredGrid& grid, const ConstraintSpec& spec) {
    const int ndof = grid.dof_count();
    const int nn = grid.node_count();
    const double inv_area = 1.0 / grid.area();
    ConstraintOperators ops;

    // Averaged shape functions and strain operator.
    const auto kernel = quad4::make_kernel(grid.hx(), grid.hy());
    ops.N = Mat::Zero(2, ndof);
    ops.B = Mat::Zero(3, ndof);
    for (int e = 0; e < grid.element_count(); ++e) {
        const auto dofs = grid.element_dofs(e);
        quad4::Matrix28 n_avg = quad4::Matrix28::Zero();
        quad4::Matrix38 b_avg = quad4::Matrix38::Zero();
        for (int q = 0; q < quad4::kGaussPoints; ++q) {
            n_avg += kernel.weight * kernel.N[q];
            b_avg += kernel.weight * kernel.B[q];
        }
        for (int a = 0; a < 8; ++a) {
            ops.N.col(dofs[a]) += inv_area * n_avg.col(a);
            ops.B.col(dofs[a]) += inv_area * b_avg.col(a);
        }
    }

    ops.Y = Mat::Zero(ndof, 3);
    ops.rigid = Mat::Zero(ndof, 2);
    for (int n = 0; n < nn; ++n) {
        const Eigen::Vector2d d = grid.nodes[n] - grid.centroid;
        ops.Y(2 * n, 0) = d.x();
        ops.Y(2 * n, 2) = 0.5 * d.y();
        ops.Y(2 * n + 1, 1) = d.y();
        ops.Y(2 * n + 1, 2) = 0.5 * d.x();
        ops.rigid(2 * n, 0) = 1.0;
        ops.rigid(2 * n + 1, 1) = 1.0;
    }

    // Map every node to its master node; -1 marks a prescribed DOF.
    std::vector<int> master(nn);
    for (int n = 0; n < nn; ++n) master[n] = n;
    std::vector<bool> prescribed(ndof, false);

    switch (spec.boundary) {
        case BoundaryKind::Free:
            break;
        case BoundaryKind::FullyPrescribed:
            for (const auto* side : {&grid.left, &grid.right, &grid.bottom, &grid.top}) {
                for (int n : *side) {
                    prescribed[2 * n] = true;
                    prescribed[2 * n + 1] = true;
                }
            }
            break;
        case BoundaryKind::PeriodicPinned: {
            check_periodic_pairs(grid);
            for (int j = 0; j <= grid.ny; ++j) {
                for (int i = 0; i <= grid.nx; ++i) {
                    const int mi = (i == grid.nx) ? 0 : i;
                    const int mj = (j == grid.ny) ? 0 : j;
                    master[grid.node(i, j)] = grid.node(mi, mj);
                }
            }
            const int pin = grid.corners[0];
            prescribed[2 * pin] = true;
            prescribed[2 * pin + 1] = true;
            break;
        }
    }
    if (!spec.tied_nodes.empty()) {
        for (int n : spec.tied_nodes) {
            if (n < 0 || n >= nn) throw Error(ErrorKind::InvalidArgument, "tied node out of range");
        }
        if (spec.fix_tied_nodes) {
            for (int n : spec.tied_nodes) {
                prescribed[2 * n] = true;
                prescribed[2 * n + 1] = true;
            }
        } else {
            if (spec.boundary == BoundaryKind::PeriodicPinned) {
                throw Error(ErrorKind::ConstraintError, "tied nodes cannot be combined with periodicity");
            }
            const int lead = spec.tied_nodes.front();
            for (int n : spec.tied_nodes) master[n] = lead;
        }
    }
    if (spec.horizontal_only) {
        for (int n = 0; n < nn; ++n) prescribed[2 * n + 1] = true;
    }

    // Column numbering follows master DOF order.
    std::vector<int> column(ndof, -1);
    int nfree = 0;
    for (int d = 0; d < ndof; ++d) {
        const int n = d / 2;
        if (master[n] == n && !prescribed[d]) column[d] = nfree++;
    }
    if (nfree == 0) {
        throw Error(ErrorKind::ConstraintError, "constraints leave no free degrees of freedom");
    }
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(ndof);
    for (int d = 0; d < ndof; ++d) {
        const int md = 2 * master[d / 2] + d % 2;
        if (prescribed[md] || prescribed[d]) continue;
        t.emplace_back(d, column[md], 1.0);
    }
    ops.P.resize(ndof, nfree);
    ops.P.setFromTriplets(t.begin(), t.end());
    return ops;
}

}  // namespace lram
