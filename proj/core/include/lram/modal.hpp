#pragma once

#include <optional>
#include <vector>

#include "lram/types.hpp"

namespace lram {

enum class SystemKind { General, Restricted, Unrestricted };

struct ModalOptions {
    int count = 12;
    // Solves (K + shift M)^-1 M; chosen automatically when empty.
    std::optional<double> shift;
    // Problems up to this size go through a dense generalized solver.
    int dense_threshold = 200;
    int max_iterations = 2000;
};

// Eigenpairs in ascending order with M-normalized modes (columns).
struct ModalSolution {
    SystemKind kind = SystemKind::General;
    Vec eigenvalues;   // rad^2/s^2
    Mat modes;         // nfree x count
    Vec coupling;      // filled by the relevance filters
    std::vector<bool> relevant;
    double shift = 0.0;
    double max_residual = 0.0;  // max normwise backward error ||K x - l M x|| / ((||K|| + |l| ||M||) ||x||)

    int size() const { return static_cast<int>(eigenvalues.size()); }
};

ModalSolution solve_smallest(const SpMat& K, const SpMat& M, const ModalOptions& options = {});

struct HermitianModalSolution {
    Vec eigenvalues;
    MatC modes;
    double max_residual = 0.0;  // max normwise backward error ||K x - l M x|| / ((||K|| + |l| ||M||) ||x||)
    int size() const { return static_cast<int>(eigenvalues.size()); }
};

// Hermitian pencil, solved through its real symmetric 2n x 2n embedding.
HermitianModalSolution solve_smallest_hermitian(const SpMatC& K, const SpMatC& M,
                                                const ModalOptions& options = {});

// Relevance of restricted modes: ||Q_k|| = ||D phi_k|| with D = I^T M P / |Omega|,
// compared against delta_tol after normalizing by the largest coupling.
std::vector<int> filter_relevant_restricted(ModalSolution& sol, const Mat& momentum_operator,
                                            double delta_tol = 1e-3);

// Relevance of unrestricted modes: lambda_k > 0 and ||<phi_k>|| above tolerance.
// `mean_operator` maps reduced DOFs to the mean displacement (N P).
// With `rigid_momentum` (rows r^T M P / sqrt(r^T M r) per rigid translation r)
// rigid modes are recognised by their momentum instead of their eigenvalue.
std::vector<int> filter_relevant_unrestricted(ModalSolution& sol, const Mat& mean_operator,
                                              double delta_tol = 1e-3,
                                              double zero_tol = 1e-8,
                                              const Mat* rigid_momentum = nullptr);

}  // namespace lram
