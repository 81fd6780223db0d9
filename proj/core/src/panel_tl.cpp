#include "lram/panel_tl.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/SparseLU>

#include "lram/errors.hpp"
#include "lram/grid.hpp"
#include "lram/quad4.hpp"

namespace lram {

namespace {

using Matrix8c = Eigen::Matrix<Complex, 8, 8>;

void check_panel(const PanelModel& p) {
    if (!(p.thickness > 0.0)) throw Error(ErrorKind::InvalidArgument, "panel thickness must be positive");
    if (p.nx < 2 || p.ny < 2) throw Error(ErrorKind::InvalidArgument, "macro grid needs at least 2x2 elements");
    if (!(p.air.rho > 0.0 && p.air.speed > 0.0)) {
        throw Error(ErrorKind::InvalidMaterial, "air properties must be positive");
    }
}

}  // namespace

SpMatC assemble_macro(const PanelModel& panel, double omega) {
    check_panel(panel);
    const StructuredGrid g = build_grid(panel.nx, panel.ny, panel.thickness, panel.panel_height());
    const auto k = quad4::make_kernel(g.hx(), g.hy());
    const Eigen::Matrix2cd rho = effective_density(panel.material, omega);
    const Eigen::Matrix3cd modulus = panel.material.stiffness.cast<Complex>() -
                                     Complex(0.0, omega) * panel.material.viscosity.cast<Complex>();
    Matrix8c De = Matrix8c::Zero();
    for (int q = 0; q < quad4::kGaussPoints; ++q) {
        const auto B = k.B[q].cast<Complex>();
        const auto N = k.N[q].cast<Complex>();
        De += k.weight * (B.transpose() * modulus * B - omega * omega * (N.transpose() * rho * N));
    }
    std::vector<Eigen::Triplet<Complex>> t;
    t.reserve(64 * g.element_count());
    for (int e = 0; e < g.element_count(); ++e) {
        const auto dofs = g.element_dofs(e);
        for (int a = 0; a < 8; ++a) {
            for (int b = 0; b < 8; ++b) t.emplace_back(dofs[a], dofs[b], De(a, b));
        }
    }
    SpMatC D(g.dof_count(), g.dof_count());
    D.setFromTriplets(t.begin(), t.end());
    return D;
}

ReflectionTransmission solve_rt(const PanelModel& panel, double omega) {
    if (!(omega > 0.0)) throw Error(ErrorKind::InvalidArgument, "frequency must be positive");
    const SpMatC D = assemble_macro(panel, omega);
    const StructuredGrid g = build_grid(panel.nx, panel.ny, panel.thickness, panel.panel_height());
    const int ndof = g.dof_count();

    // Columns: interior/boundary unknowns first, then R and T.
    std::vector<int> col(ndof, -1);
    int nf = 0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            const int n = g.node(i, j);
            if (i != 0 && i != g.nx) col[2 * n] = nf++;
            col[2 * n + 1] = nf++;
        }
    }
    const int cR = nf, cT = nf + 1;
    std::vector<Eigen::Triplet<Complex>> t;
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            const int n = g.node(i, j);
            const int m = g.node(i, j == g.ny ? 0 : j);  // periodic top/bottom
            if (i == 0) {
                t.emplace_back(2 * n, cR, -1.0);
            } else if (i == g.nx) {
                t.emplace_back(2 * n, cT, 1.0);
            } else {
                t.emplace_back(2 * n, col[2 * m], 1.0);
            }
            t.emplace_back(2 * n + 1, col[2 * m + 1], 1.0);
        }
    }
    SpMatC P(ndof, nf + 2);
    P.setFromTriplets(t.begin(), t.end());
    const SpMatC A = P.transpose() * D * P;

    // Condense the structural unknowns onto (R, T). The left face moves by
    // 1 + R (incident plus reflected), so the load is the R column itself.
    const SpMatC Aff = A.topLeftCorner(nf, nf);
    Eigen::SparseLU<SpMatC> lu;
    lu.compute(Aff);
    if (lu.info() != Eigen::Success) {
        throw Error(ErrorKind::ResonanceSingularity,
                    "panel matrix singular at " + std::to_string(rad_to_hz(omega)) + " Hz");
    }
    const MatC X = lu.solve(MatC(A.block(0, cR, nf, 2)));
    if (lu.info() != Eigen::Success || !X.allFinite()) {
        throw Error(ErrorKind::ResonanceSingularity,
                    "panel solve failed at " + std::to_string(rad_to_hz(omega)) + " Hz");
    }
    Eigen::Matrix2cd S = MatC(A.block(nf, nf, 2, 2)) - MatC(A.block(nf, 0, 2, nf)) * X;
    // Complex symmetric in exact arithmetic; round-off asymmetry would leak
    // straight into the energy balance.
    S = (0.5 * (S + S.transpose())).eval();

    const double Ka = panel.air.rho * panel.air.speed * omega * panel.panel_height();
    const Complex iKa(0.0, Ka);
    Eigen::Matrix2cd Abb = S;
    Abb(0, 0) -= iKa;
    Abb(1, 1) -= iKa;
    Eigen::Vector2cd bb = S.col(0);
    bb(0) += iKa;
    const Complex det = Abb(0, 0) * Abb(1, 1) - Abb(0, 1) * Abb(1, 0);
    if (std::abs(det) == 0.0 || !std::isfinite(std::abs(det))) {
        throw Error(ErrorKind::ResonanceSingularity,
                    "reduced 2x2 system singular at " + std::to_string(rad_to_hz(omega)) + " Hz");
    }
    ReflectionTransmission rt;
    rt.R = (Abb(1, 1) * bb(0) - Abb(0, 1) * bb(1)) / det;
    rt.T = (Abb(0, 0) * bb(1) - Abb(1, 0) * bb(0)) / det;
    return rt;
}

double transmission_loss_db(Complex T) { return -20.0 * std::log10(std::abs(T)); }

TLResult tl_sweep(const PanelModel& panel, const std::vector<double>& f_hz) {
    check_panel(panel);
    TLResult r;
    r.samples.reserve(f_hz.size());
    for (double f : f_hz) {
        TLSample s;
        s.f_hz = f;
        try {
            if (!(f > 0.0)) throw Error(ErrorKind::InvalidArgument, "frequency samples must be positive");
            const auto rt = solve_rt(panel, hz_to_rad(f));
            s.R = rt.R;
            s.T = rt.T;
            s.tl_db = transmission_loss_db(rt.T);
        } catch (const Error& e) {
            s.ok = false;
            s.error = e.what();
            s.R = s.T = Complex(std::nan(""), std::nan(""));
            s.tl_db = std::nan("");
        }
        r.samples.push_back(s);
    }
    return r;
}

std::optional<TLBand> first_band_above(const TLResult& r, double threshold_db) {
    std::optional<TLBand> band;
    for (const auto& s : r.samples) {
        const bool above = s.ok && s.tl_db > threshold_db;
        if (above) {
            if (!band) band = TLBand{s.f_hz, s.f_hz, threshold_db};
            else band->end_hz = s.f_hz;
        } else if (band) {
            break;
        }
    }
    return band;
}

std::string tl_csv(const TLResult& r) {
    std::ostringstream os;
    os << "f_Hz,Re_R,Im_R,Re_T,Im_T,TL_dB\n";
    char buf[160];
    for (const auto& s : r.samples) {
        std::snprintf(buf, sizeof buf, "%.10g,%.12e,%.12e,%.12e,%.12e,%.10g\n", s.f_hz, s.R.real(), s.R.imag(),
                      s.T.real(), s.T.imag(), s.tl_db);
        os << buf;
    }
    return os.str();
}

std::string band_report(const std::optional<TLBand>& band, double threshold_db) {
    char buf[96];
    if (!band) {
        std::snprintf(buf, sizeof buf, "none none %.10g\n", threshold_db);
    } else {
        std::snprintf(buf, sizeof buf, "%.10g %.10g %.10g\n", band->start_hz, band->end_hz, threshold_db);
    }
    return std::string("# band_start_Hz band_end_Hz threshold_dB\n") + buf;
}

}  // namespace lram
