#include "lram/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "lram/constraints.hpp"
#include "lram/errors.hpp"
#include "lram/modal.hpp"

namespace lram {

namespace {

// x-coupled undamped poles of rho_xx, ascending, merged when coincident.
std::vector<double> x_poles(const EffectiveMaterial& em) {
    std::vector<double> w2;
    const double qmax = em.mode_count() ? em.Q.row(0).cwiseAbs().maxCoeff() : 0.0;
    for (int k = 0; k < em.mode_count(); ++k) {
        if (qmax > 0.0 && std::abs(em.Q(0, k)) > 1e-9 * qmax) w2.push_back(em.omega2(k));
    }
    std::sort(w2.begin(), w2.end());
    std::vector<double> out;
    for (double v : w2) {
        if (out.empty() || v > out.back() * (1.0 + 1e-9)) out.push_back(v);
    }
    return out;
}

double rho_xx_undamped(const EffectiveMaterial& em, double w) {
    double r = em.rho_bar;
    for (int k = 0; k < em.mode_count(); ++k) {
        r += w * w * em.Q(0, k) * em.Q(0, k) / (em.omega2(k) - w * w);
    }
    return r;
}

}  // namespace

std::vector<double> sample_frequencies(double f_min_hz, double f_max_hz, int count,
                                       const EffectiveMaterial* em, double nudge_hz) {
    if (count < 1) throw Error(ErrorKind::InvalidArgument, "need at least one frequency sample");
    if (!(f_max_hz >= f_min_hz) || f_min_hz < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "invalid frequency range");
    }
    std::vector<double> f(count);
    for (int i = 0; i < count; ++i) {
        f[i] = count == 1 ? f_min_hz : f_min_hz + (f_max_hz - f_min_hz) * i / (count - 1);
    }
    return em ? nudge_off_poles(std::move(f), *em, nudge_hz) : f;
}

std::vector<double> nudge_off_poles(std::vector<double> f_hz, const EffectiveMaterial& em, double nudge_hz) {
    if (em.mode_count() == 0 || em.omega_d.cwiseAbs().maxCoeff() != 0.0) return f_hz;
    for (double& v : f_hz) {
        for (int k = 0; k < em.mode_count(); ++k) {
            const double w = hz_to_rad(v);
            if (std::abs(em.omega2(k) - w * w) < 1e-9 * em.omega2(k)) v += nudge_hz;
        }
    }
    return f_hz;
}

DispersionCurve effective_dispersion(const EffectiveMaterial& em, const std::vector<double>& f_hz,
                                     double cell_size) {
    if (!(cell_size > 0.0)) throw Error(ErrorKind::InvalidArgument, "cell size must be positive");
    DispersionCurve c;
    c.f_hz = f_hz;
    c.k_norm.reserve(f_hz.size());
    for (double f : f_hz) {
        const double w = hz_to_rad(f);
        const Complex rho = effective_density(em, w)(0, 0);
        const Complex mod(em.stiffness(0, 0), -w * em.viscosity(0, 0));
        Complex k = w * std::sqrt(rho / mod);
        // Two roots +-k: keep the decaying one, and on the real axis the
        // forward-travelling one, so the branch is continuous in frequency.
        if (k.imag() < 0.0) k = -k;
        if (std::abs(k.imag()) <= 1e-12 * std::abs(k)) k = Complex(std::abs(k.real()), 0.0);
        c.k_norm.push_back(k * cell_size / kPi);
    }
    return c;
}

std::vector<Bandgap> effective_bandgaps(const EffectiveMaterial& em, double min_relative_width) {
    std::vector<Bandgap> out;
    if (!(em.stiffness(0, 0) > 0.0)) return out;
    const auto poles = x_poles(em);
    for (std::size_t i = 0; i < poles.size(); ++i) {
        const double lo = std::sqrt(poles[i]);
        double hi;
        if (i + 1 < poles.size()) {
            hi = std::sqrt(poles[i + 1]);
        } else {
            hi = 2.0 * lo;
            for (int t = 0; t < 200 && rho_xx_undamped(em, hi) < 0.0; ++t) hi *= 2.0;
            if (rho_xx_undamped(em, hi) < 0.0) continue;
        }
        // rho_xx rises monotonically from -inf between consecutive poles.
        double a = lo * (1.0 + 1e-12), b = hi * (1.0 - 1e-12);
        if (rho_xx_undamped(em, b) < 0.0) {
            // Stays negative up to the next pole: the gap runs into it.
            out.push_back({rad_to_hz(lo), rad_to_hz(hi)});
            continue;
        }
        for (int it = 0; it < 200 && b - a > 1e-13 * b; ++it) {
            const double m = 0.5 * (a + b);
            (rho_xx_undamped(em, m) < 0.0 ? a : b) = m;
        }
        out.push_back({rad_to_hz(lo), rad_to_hz(0.5 * (a + b))});
    }
    // Merge touching intervals.
    std::vector<Bandgap> merged;
    for (const auto& g : out) {
        if (!merged.empty() && g.lower_hz <= merged.back().upper_hz * (1.0 + 1e-9)) {
            merged.back().upper_hz = std::max(merged.back().upper_hz, g.upper_hz);
        } else {
            merged.push_back(g);
        }
    }
    std::erase_if(merged, [&](const Bandgap& g) { return g.width() < min_relative_width * g.lower_hz; });
    return merged;
}

BlochBranches bloch_oracle(const StructuredGrid& grid, const MaterialField& field,
                           const std::vector<double>& k_norm, int branches) {
    if (branches < 1) throw Error(ErrorKind::InvalidArgument, "need at least one branch");
    // Undamped: only M and K.
    const SystemMatrices sys = assemble(grid, field, {true, false, true});
    const SpMatC Kc = sys.K.cast<Complex>();
    const SpMatC Mc = sys.M.cast<Complex>();
    const int ndof = grid.dof_count();
    const int nfree = 2 * grid.nx * grid.ny;

    BlochBranches out;
    out.k_norm = k_norm;
    out.f_hz = Mat::Constant(static_cast<int>(k_norm.size()), branches, std::nan(""));
    out.x_participation = Mat::Zero(static_cast<int>(k_norm.size()), branches);
    for (std::size_t s = 0; s < k_norm.size(); ++s) {
        const double kappa = k_norm[s] * kPi / grid.lx;
        const Complex phase = std::exp(Complex(0.0, kappa * grid.lx));
        std::vector<Eigen::Triplet<Complex>> t;
        t.reserve(ndof);
        for (int j = 0; j <= grid.ny; ++j) {
            for (int i = 0; i <= grid.nx; ++i) {
                const int mi = i == grid.nx ? 0 : i;
                const int mj = j == grid.ny ? 0 : j;
                const int col = 2 * (mj * grid.nx + mi);
                const Complex fac = i == grid.nx ? phase : Complex(1.0, 0.0);
                const int n = grid.node(i, j);
                t.emplace_back(2 * n, col, fac);
                t.emplace_back(2 * n + 1, col + 1, fac);
            }
        }
        SpMatC P(ndof, nfree);
        P.setFromTriplets(t.begin(), t.end());
        const SpMatC PH = P.adjoint();
        const SpMatC Kk = PH * Kc * P;
        const SpMatC Mk = PH * Mc * P;
        ModalOptions mo;
        mo.count = branches;
        const HermitianModalSolution sol = solve_smallest_hermitian(Kk, Mk, mo);
        for (int b = 0; b < std::min(branches, sol.size()); ++b) {
            out.f_hz(s, b) = rad_to_hz(std::sqrt(std::max(sol.eigenvalues(b), 0.0)));
            // Share of kinetic energy carried by x motion. Momentum would vanish
            // for the optical branch at k = 0, this does not.
            const VecC u = P * sol.modes.col(b);
            VecC ux = u;
            for (int n = 0; n < grid.node_count(); ++n) ux(2 * n + 1) = 0.0;
            const double ex = std::real(ux.dot(Mc * ux));
            const double uu = std::real(u.dot(Mc * u));
            out.x_participation(s, b) = uu > 0.0 ? ex / uu : 0.0;
        }
    }
    return out;
}

std::optional<Bandgap> bloch_bandgap(const BlochBranches& b, double min_participation) {
    // At k = 0 degenerate x/y pairs come out in arbitrary combinations; skip it.
    double lower = -1.0;
    double upper = std::numeric_limits<double>::infinity();
    for (int s = 0; s < b.f_hz.rows(); ++s) {
        if (b.k_norm[s] == 0.0) continue;
        int found = 0;
        for (int k = 0; k < b.f_hz.cols() && found < 2; ++k) {
            if (std::isnan(b.f_hz(s, k)) || b.x_participation(s, k) < min_participation) continue;
            if (found == 0) lower = std::max(lower, b.f_hz(s, k));
            else upper = std::min(upper, b.f_hz(s, k));
            ++found;
        }
    }
    if (lower < 0.0 || !std::isfinite(upper) || upper <= lower) return std::nullopt;
    return Bandgap{lower, upper};
}

std::string dispersion_csv(const DispersionCurve& c) {
    std::ostringstream os;
    os << "f_Hz,Re_k_norm,Im_k_norm\n";
    char buf[96];
    for (std::size_t i = 0; i < c.f_hz.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g,%.12e,%.12e\n", c.f_hz[i], c.k_norm[i].real(), c.k_norm[i].imag());
        os << buf;
    }
    return os.str();
}

std::string bloch_csv(const BlochBranches& b) {
    std::ostringstream os;
    os << "k_norm";
    for (int k = 0; k < b.f_hz.cols(); ++k) os << ",f" << (k + 1) << "_Hz";
    os << '\n';
    char buf[48];
    for (int s = 0; s < b.f_hz.rows(); ++s) {
        std::snprintf(buf, sizeof buf, "%.10g", b.k_norm[s]);
        os << buf;
        for (int k = 0; k < b.f_hz.cols(); ++k) {
            std::snprintf(buf, sizeof buf, ",%.10g", b.f_hz(s, k));
            os << buf;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace lram
