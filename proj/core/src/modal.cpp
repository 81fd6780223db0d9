#include "lram/modal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <arpack/arpack.hpp>

#include "lram/errors.hpp"

namespace lram {

namespace {

double trace(const SpMat& A) {
    double t = 0.0;
    for (int k = 0; k < A.outerSize(); ++k) {
        for (SpMat::InnerIterator it(A, k); it; ++it) {
            if (it.row() == it.col()) t += it.value();
        }
    }
    return t;
}

double inf_norm(const SpMat& A) {
    Vec rows = Vec::Zero(A.rows());
    for (int k = 0; k < A.outerSize(); ++k) {
        for (SpMat::InnerIterator it(A, k); it; ++it) rows(it.row()) += std::abs(it.value());
    }
    return rows.size() ? rows.maxCoeff() : 0.0;
}

struct RawEigen {
    Vec values;
    Mat vectors;
    bool converged = false;
};

// Dense route: M x = theta (K + shift M) x, theta = 1 / (lambda + shift).
RawEigen dense_smallest(const SpMat& K, const SpMat& M, int count, double shift) {
    const Mat A = Mat(K) + shift * Mat(M);
    const Mat Md = Mat(M);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Md, A);
    if (es.info() != Eigen::Success) return {};
    const Vec& theta = es.eigenvalues();  // ascending
    const int n = static_cast<int>(theta.size());
    RawEigen out;
    const int take = std::min(count, n);
    out.values.resize(take);
    out.vectors.resize(n, take);
    int got = 0;
    for (int k = n - 1; k >= 0 && got < take; --k) {
        if (!(theta(k) > 0.0)) break;
        out.values(got) = 1.0 / theta(k) - shift;
        out.vectors.col(got) = es.eigenvectors().col(k);
        ++got;
    }
    out.values.conservativeResize(got);
    out.vectors.conservativeResize(n, got);
    out.converged = got == take;
    return out;
}

// ARPACK mode 3 with sigma = -shift.
RawEigen arpack_smallest(const SpMat& K, const SpMat& M, int count, double shift, int max_iterations) {
    const int n = static_cast<int>(K.rows());
    SpMat A = K + shift * M;
    Eigen::SimplicialLDLT<SpMat> ldlt(A);
    if (ldlt.info() != Eigen::Success) return {};

    const a_int nev = std::min(count, n - 1);
    const a_int ncv = std::min<a_int>(n, std::max<a_int>(2 * nev + 1, nev + 24));
    const double sigma = -shift;
    std::vector<double> resid(n, 0.0), v(static_cast<std::size_t>(n) * ncv), workd(3 * n);
    const a_int lworkl = ncv * (ncv + 8);
    std::vector<double> workl(lworkl);
    a_int iparam[11] = {0};
    a_int ipntr[14] = {0};
    iparam[0] = 1;
    iparam[2] = max_iterations;
    iparam[6] = 3;
    // Deterministic start vector.
    for (int i = 0; i < n; ++i) resid[i] = 1.0 + 0.5 * std::sin(1.0 + 0.7 * i);
    a_int info = 1;
    a_int ido = 0;
    const double tol = 0.0;

    while (true) {
        arpack::saupd(ido, arpack::bmat::generalized, n, arpack::which::largest_magnitude, nev, tol,
                      resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(), workl.data(),
                      lworkl, info);
        if (ido == -1) {
            Eigen::Map<const Vec> x(&workd[ipntr[0] - 1], n);
            Eigen::Map<Vec> y(&workd[ipntr[1] - 1], n);
            y = ldlt.solve(M * x);
        } else if (ido == 1) {
            Eigen::Map<const Vec> z(&workd[ipntr[2] - 1], n);
            Eigen::Map<Vec> y(&workd[ipntr[1] - 1], n);
            y = ldlt.solve(z);
        } else if (ido == 2) {
            Eigen::Map<const Vec> x(&workd[ipntr[0] - 1], n);
            Eigen::Map<Vec> y(&workd[ipntr[1] - 1], n);
            y = M * x;
        } else {
            break;
        }
    }
    if (info < 0) return {};
    const a_int nconv = iparam[4];
    if (nconv <= 0) return {};

    std::vector<a_int> select(ncv, 0);
    std::vector<double> d(nev + 1, 0.0);
    std::vector<double> z(static_cast<std::size_t>(n) * (nev + 1), 0.0);
    a_int einfo = 0;
    arpack::seupd(1, arpack::howmny::ritz_vectors, select.data(), d.data(), z.data(), n, sigma,
                  arpack::bmat::generalized, n, arpack::which::largest_magnitude, nev, tol,
                  resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(), workl.data(), lworkl,
                  einfo);
    if (einfo != 0) return {};
    const int got = static_cast<int>(std::min(nconv, nev));
    RawEigen out;
    out.values = Eigen::Map<Vec>(d.data(), got);
    out.vectors = Eigen::Map<Mat>(z.data(), n, got);
    out.converged = (info == 0) && got == nev;
    return out;
}

// Smallest eigenvalue that is not a rigid-body zero; 0 when none.
double first_nonzero(const Vec& values) {
    if (values.size() == 0) return 0.0;
    const double scale = values.cwiseAbs().maxCoeff();
    double best = 0.0;
    for (double v : values) {
        if (v > 1e-8 * scale && (best == 0.0 || v < best)) best = v;
    }
    return best;
}

ModalSolution finalize(const SpMat& K, const SpMat& M, RawEigen raw, double shift) {
    const int m = static_cast<int>(raw.values.size());
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return raw.values(a) < raw.values(b); });
    ModalSolution sol;
    sol.shift = shift;
    sol.eigenvalues.resize(m);
    sol.modes.resize(K.rows(), m);
    const double knorm = inf_norm(K);
    const double mnorm = inf_norm(M);
    for (int k = 0; k < m; ++k) {
        Vec phi = raw.vectors.col(order[k]);
        const double mass = phi.dot(M * phi);
        if (!(mass > 0.0)) {
            throw Error(ErrorKind::SolverFailure, "mode with non-positive modal mass");
        }
        phi /= std::sqrt(mass);
        Eigen::Index imax = 0;
        phi.cwiseAbs().maxCoeff(&imax);
        if (phi(imax) < 0.0) phi = -phi;
        const double lam = raw.values(order[k]);
        sol.eigenvalues(k) = lam;
        sol.modes.col(k) = phi;
        // Normwise backward error; stays meaningful for rigid modes and for
        // high-contrast phases where ||K phi|| alone is dominated by round-off.
        const Vec r = K * phi - lam * (M * phi);
        const double denom = (knorm + std::abs(lam) * mnorm) * phi.norm();
        sol.max_residual = std::max(sol.max_residual, r.norm() / denom);
    }
    sol.coupling = Vec::Zero(m);
    sol.relevant.assign(m, false);
    return sol;
}

}  // namespace

ModalSolution solve_smallest(const SpMat& K, const SpMat& M, const ModalOptions& options) {
    const int n = static_cast<int>(K.rows());
    if (K.cols() != n || M.rows() != n || M.cols() != n) {
        throw Error(ErrorKind::InvalidArgument, "K and M must be square and of equal size");
    }
    if (options.count < 1) {
        throw Error(ErrorKind::InvalidArgument, "mode count must be positive");
    }
    const double tm = trace(M);
    if (!(tm > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "mass matrix has no positive diagonal");
    }
    const int count = std::min(options.count, n);
    const bool dense = n <= options.dense_threshold || count >= n - 1;

    RawEigen raw;
    double shift = 0.0;
    if (options.shift) {
        shift = *options.shift;
        raw = dense ? dense_smallest(K, M, count, shift)
                    : arpack_smallest(K, M, count, shift, options.max_iterations);
    } else {
        // Probe with a short iteration budget, lowering the shift until the
        // spectrum near it resolves, then settle at 1e-3 of the first
        // elastic eigenvalue.
        shift = 1e-6 * trace(K) / tm;
        double lam = 0.0;
        for (int attempt = 0; attempt < 10 && lam == 0.0; ++attempt) {
            raw = dense ? dense_smallest(K, M, count, shift)
                        : arpack_smallest(K, M, count, shift, std::min(options.max_iterations, 60));
            if (raw.converged) lam = first_nonzero(raw.values);
            if (lam == 0.0) shift *= 1e-3;
        }
        if (lam > 0.0 && (!raw.converged || shift > 1e-2 * lam)) {
            shift = 1e-3 * lam;
            raw = dense ? dense_smallest(K, M, count, shift)
                        : arpack_smallest(K, M, count, shift, options.max_iterations);
        } else if (!raw.converged) {
            raw = dense ? dense_smallest(K, M, count, shift)
                        : arpack_smallest(K, M, count, shift, options.max_iterations);
        }
    }
    if (!raw.converged) {
        throw Error(ErrorKind::SolverFailure,
                    "eigensolver did not converge for " + std::to_string(count) + " modes");
    }
    return finalize(K, M, std::move(raw), shift);
}

HermitianModalSolution solve_smallest_hermitian(const SpMatC& K, const SpMatC& M,
                                                const ModalOptions& options) {
    const int n = static_cast<int>(K.rows());
    auto embed = [n](const SpMatC& A) {
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(4 * A.nonZeros());
        for (int k = 0; k < A.outerSize(); ++k) {
            for (SpMatC::InnerIterator it(A, k); it; ++it) {
                const int r = static_cast<int>(it.row());
                const int c = static_cast<int>(it.col());
                const double re = it.value().real();
                const double im = it.value().imag();
                t.emplace_back(r, c, re);
                t.emplace_back(r + n, c + n, re);
                if (im != 0.0) {
                    t.emplace_back(r, c + n, -im);
                    t.emplace_back(r + n, c, im);
                }
            }
        }
        SpMat out(2 * n, 2 * n);
        out.setFromTriplets(t.begin(), t.end());
        return out;
    };
    ModalOptions real_opts = options;
    real_opts.count = std::min(2 * options.count, 2 * n);
    real_opts.dense_threshold = 2 * options.dense_threshold;
    const ModalSolution real = solve_smallest(embed(K), embed(M), real_opts);

    // Each complex eigenvector appears twice ([x; y] and [-y; x]); keep one
    // representative per M-orthogonal direction.
    HermitianModalSolution out;
    std::vector<double> values;
    std::vector<VecC> vecs;
    for (int k = 0; k < real.size() && static_cast<int>(vecs.size()) < options.count; ++k) {
        VecC z = real.modes.col(k).head(n).cast<Complex>() +
                 Complex(0.0, 1.0) * real.modes.col(k).tail(n).cast<Complex>();
        for (const auto& w : vecs) {
            z -= w * (w.adjoint() * (M * z))(0);
        }
        const double mass = std::real((z.adjoint() * (M * z))(0));
        if (mass < 0.25) continue;
        z /= std::sqrt(mass);
        values.push_back(real.eigenvalues(k));
        vecs.push_back(z);
    }
    out.eigenvalues = Eigen::Map<Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
    out.modes.resize(n, static_cast<Eigen::Index>(vecs.size()));
    for (std::size_t k = 0; k < vecs.size(); ++k) out.modes.col(static_cast<Eigen::Index>(k)) = vecs[k];
    out.max_residual = real.max_residual;
    return out;
}

std::vector<int> filter_relevant_restricted(ModalSolution& sol, const Mat& momentum_operator,
                                            double delta_tol) {
    if (momentum_operator.cols() != sol.modes.rows()) {
        throw Error(ErrorKind::InvalidArgument, "momentum operator does not match mode size");
    }
    sol.kind = SystemKind::Restricted;
    sol.coupling = (momentum_operator * sol.modes).colwise().norm().transpose();
    sol.relevant.assign(sol.size(), false);
    const double cmax = sol.size() ? sol.coupling.maxCoeff() : 0.0;
    std::vector<int> idx;
    for (int k = 0; k < sol.size(); ++k) {
        if (cmax > 0.0 && sol.coupling(k) / cmax > delta_tol) {
            sol.relevant[k] = true;
            idx.push_back(k);
        }
    }
    if (idx.empty()) {
        throw Error(ErrorKind::NoRelevantMode, "no restricted mode couples to the mean momentum");
    }
    return idx;
}

std::vector<int> filter_relevant_unrestricted(ModalSolution& sol, const Mat& mean_operator,
                                              double delta_tol, double zero_tol,
                                              const Mat* rigid_momentum) {
    if (mean_operator.cols() != sol.modes.rows()) {
        throw Error(ErrorKind::InvalidArgument, "mean operator does not match mode size");
    }
    sol.kind = SystemKind::Unrestricted;
    sol.coupling = (mean_operator * sol.modes).colwise().norm().transpose();
    sol.relevant.assign(sol.size(), false);
    const double scale = sol.size() ? sol.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
    const double cmax = sol.size() ? sol.coupling.maxCoeff() : 0.0;
    std::vector<int> idx;
    for (int k = 0; k < sol.size(); ++k) {
        bool elastic = sol.eigenvalues(k) > zero_tol * scale;
        if (rigid_momentum) {
            // Elastic modes are M-orthogonal to rigid translations; this is
            // robust even when round-off leaves the rigid eigenvalue far from 0.
            elastic = (*rigid_momentum * sol.modes.col(k)).norm() < 0.5;
        }
        if (elastic && cmax > 0.0 && sol.coupling(k) / cmax > delta_tol) {
            sol.relevant[k] = true;
            idx.push_back(k);
        }
    }
    if (idx.empty()) {
        throw Error(ErrorKind::NoRelevantMode, "no elastic unrestricted mode with non-zero mean");
    }
    return idx;
}

}  // namespace lram
