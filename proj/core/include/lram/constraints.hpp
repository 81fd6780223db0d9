#pragma once

#include <vector>

#include "lram/grid.hpp"
#include "lram/types.hpp"

namespace lram {

enum class BoundaryKind {
    Free,                // no boundary restriction
    FullyPrescribed,     // every boundary DOF fixed
    PeriodicPinned,      // opposite sides tied, corners pinned
};

struct ConstraintSpec {
    BoundaryKind boundary = BoundaryKind::PeriodicPinned;
    bool horizontal_only = false;  // prescribe every vertical DOF
    // Nodes that share one translation (or are fixed when fix_tied_nodes):
    // the rigid limit of a very stiff sub-region.
    std::vector<int> tied_nodes;
    bool fix_tied_nodes = false;
};

// Kinematic operators of the RVE. Averages are volume averages, so
// N u = <u>, B u = <grad_s u>, and B Y = I exactly.
struct ConstraintOperators {
    Mat N;      // 2 x ndof
    Mat B;      // 3 x ndof (xx, yy, xy engineering)
    Mat Y;      // ndof x 3, displacement of a homogeneous strain about the centroid
    Mat rigid;  // ndof x 2, unit translations
    SpMat P;    // ndof x nfree selection / periodicity operator

    int free_count() const { return static_cast<int>(P.cols()); }
};

ConstraintOperators build_constraints(const StructuredGrid& grid, const ConstraintSpec& spec);

}  // namespace lram
