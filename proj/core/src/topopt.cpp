#include "lram/topopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lram/assembly.hpp"
#include "lram/errors.hpp"
#include "lram/quad4.hpp"

namespace lram {

double feasibility_lower_limit(const std::vector<MaterialPhase>& phases, double cell_size) {
    if (phases.empty()) throw Error(ErrorKind::InvalidArgument, "no material phases");
    if (!(cell_size > 0.0)) throw Error(ErrorKind::InvalidArgument, "cell size must be positive");
    double min_mod = std::numeric_limits<double>::infinity();
    double max_rho = 0.0;
    for (const auto& p : phases) {
        min_mod = std::min(min_mod, p.p_wave_modulus());
        max_rho = std::max(max_rho, p.rho);
    }
    if (!(max_rho > 0.0)) throw Error(ErrorKind::InvalidMaterial, "all phases are massless");
    return std::sqrt(min_mod / max_rho) / cell_size;
}

CostBreakdown evaluate_cost(double lambda_star, double lambda, double target_lambda, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "alpha must lie in [0, 1]");
    }
    if (!(lambda_star > 1.0 && lambda > 1.0 && target_lambda > 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "eigenvalues must exceed 1 rad^2/s^2 for the log cost");
    }
    const double a = std::log(lambda_star);
    const double b = std::log(target_lambda);
    const double c = std::log(lambda);
    CostBreakdown out;
    out.alpha = alpha;
    out.target_lambda = target_lambda;
    out.f = (a - b) / (a + b);
    out.g = a / c;
    out.pi = alpha * out.f * out.f + (1.0 - alpha) * out.g * out.g;
    out.d_lambda_star = 4.0 * alpha * out.f * b / (lambda_star * (a + b) * (a + b)) +
                        2.0 * (1.0 - alpha) * out.g / (lambda_star * c);
    out.d_lambda = -2.0 * (1.0 - alpha) * out.g * out.g / (lambda * c);
    return out;
}

namespace {

// r^T M P / sqrt(r^T M r) for each rigid translation r with non-zero mass.
Mat rigid_momentum(const SpMat& M, const ConstraintOperators& ops) {
    Mat out = Mat::Zero(2, ops.free_count());
    for (int d = 0; d < 2; ++d) {
        const Vec Mr = M * ops.rigid.col(d);
        const double m = ops.rigid.col(d).dot(Mr);
        if (m > 0.0) out.row(d) = (ops.P.transpose() * Mr).transpose() / std::sqrt(m);
    }
    return out;
}

// Restricted: boundary fixed. Unrestricted: free. Both horizontal only; with
// a rigid frame its nodes are fixed (restricted) or share one translation.
ConstraintSpec frame_spec(const StructuredGrid& grid, const OptimizerSettings& s, bool restricted) {
    ConstraintSpec spec;
    spec.boundary = restricted ? BoundaryKind::FullyPrescribed : BoundaryKind::Free;
    spec.horizontal_only = true;
    if (s.rigid_frame) {
        spec.tied_nodes = make_layout(grid, s.frame_fraction).frame_nodes();
        spec.fix_tied_nodes = restricted;
    }
    return spec;
}

SpMat project(const SpMat& A, const SpMat& P) {
    SpMat out = P.transpose() * A * P;
    out.makeCompressed();
    return out;
}

}  // namespace

RveEvaluator::RveEvaluator(const StructuredGrid& grid, PhaseSet phases,
                           const OptimizerSettings& settings)
    : grid_(grid),
      settings_(settings),
      props_(scale_phases(phases, settings.scaling)),
      restricted_(build_constraints(grid, frame_spec(grid, settings, true))),
      unrestricted_(build_constraints(grid, frame_spec(grid, settings, false))) {}

double RveEvaluator::target_lambda() const {
    const double w = hz_to_rad(settings_.target_hz);
    return w * w;
}

ModalSolution RveEvaluator::solve_relevant(const SpMat& K, const SpMat& M, bool restricted,
                                           const Mat& op, const Mat* rigid, int& first) const {
    ModalOptions mo;
    mo.count = settings_.mode_count;
    const int n = static_cast<int>(K.rows());
    while (true) {
        ModalSolution sol = solve_smallest(K, M, mo);
        try {
            const auto idx = restricted ? filter_relevant_restricted(sol, op, settings_.delta_tol)
                                        : filter_relevant_unrestricted(sol, op, settings_.delta_tol,
                                                                       1e-8, rigid);
            first = idx.front();
            return sol;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NoRelevantMode || mo.count >= std::min(n - 1, 96)) throw;
            mo.count = std::min({2 * mo.count, n - 1, 96});
        }
    }
}

DesignEvaluation RveEvaluator::evaluate(const RveLayout& layout) const {
    DesignEvaluation ev;
    ev.phases = gauss_phases(layout);
    ev.volumes = volume_fractions(ev.phases);
    const MaterialField field = material_field(grid_, ev.phases, props_, false);
    const SystemMatrices sys = assemble(grid_, field, {true, false, true});
    const double area = grid_.area();

    {
        const SpMat& P = restricted_.P;
        const Mat D = (P.transpose() * (sys.M * restricted_.rigid)).transpose() / area;
        ev.restricted = solve_relevant(project(sys.K, P), project(sys.M, P), true, D, nullptr,
                                       ev.first_restricted);
    }
    {
        const SpMat& P = unrestricted_.P;
        const Mat NP = (P.transpose() * unrestricted_.N.transpose()).transpose();
        const Mat R = rigid_momentum(sys.M, unrestricted_);
        ev.unrestricted = solve_relevant(project(sys.K, P), project(sys.M, P), false, NP, &R,
                                         ev.first_unrestricted);
    }
    ev.lambda_star = ev.restricted.eigenvalues(ev.first_restricted);
    ev.lambda = ev.unrestricted.eigenvalues(ev.first_unrestricted);
    ev.cost = evaluate_cost(ev.lambda_star, ev.lambda, target_lambda(), settings_.alpha);
    return ev;
}

Vec RveEvaluator::eigen_sensitivity(const RveLayout& layout, const std::vector<Phase>& phases,
                                    const Vec& mode_full, double lambda) const {
    const auto& g = grid_;
    const auto kernel = quad4::make_kernel(g.hx(), g.hy());
    const double n = settings_.interp_exponent;
    Voigt3 J = Voigt3::Zero();
    J.topLeftCorner<2, 2>().setOnes();
    const Voigt3 Dv = plane_strain_stiffness(0.0, 1.0);

    // Derivatives at chi = 0 and chi = 1.
    Voigt3 dC[2];
    double drho[2];
    for (int c = 0; c < 2; ++c) {
        const double chi = c;
        const double dK = interpolate(chi, {n, props_.dense.bulk, props_.soft.bulk}).derivative;
        const double dG = interpolate(chi, {n, props_.dense.shear, props_.soft.shear}).derivative;
        drho[c] = interpolate(chi, {n, props_.dense.rho, props_.soft.rho}).derivative;
        dC[c] = dK * J + dG * Dv;
    }

    Vec out = Vec::Zero(g.gauss_count());
    for (int e = 0; e < g.element_count(); ++e) {
        if (layout.frame_element(e)) continue;
        const auto dofs = g.element_dofs(e);
        Eigen::Matrix<double, 8, 1> ue;
        for (int a = 0; a < 8; ++a) ue(a) = mode_full(dofs[a]);
        for (int q = 0; q < 4; ++q) {
            const int gp = 4 * e + q;
            const int c = phases[gp] == Phase::Dense ? 1 : 0;
            const Eigen::Vector3d eps = kernel.B[q] * ue;
            const Eigen::Vector2d u = kernel.N[q] * ue;
            out(gp) = eps.dot(dC[c] * eps) - lambda * drho[c] * u.squaredNorm();
        }
    }
    return out;
}

Vec RveEvaluator::gauss_sensitivity(const RveLayout& layout, const DesignEvaluation& ev) const {
    const Vec rs = restricted_.P * ev.restricted.modes.col(ev.first_restricted);
    const Vec us = unrestricted_.P * ev.unrestricted.modes.col(ev.first_unrestricted);
    Vec s = ev.cost.d_lambda_star * eigen_sensitivity(layout, ev.phases, rs, ev.lambda_star);
    if (ev.cost.d_lambda != 0.0) {
        s += ev.cost.d_lambda * eigen_sensitivity(layout, ev.phases, us, ev.lambda);
    }
    return s;
}

Vec RveEvaluator::nodal_sensitivity(const RveLayout& layout, const Vec& gauss_field) const {
    const auto& g = grid_;
    Vec num = Vec::Zero(g.node_count());
    Vec den = Vec::Zero(g.node_count());
    for (int e = 0; e < g.element_count(); ++e) {
        if (layout.frame_element(e)) continue;
        const auto nodes = g.element_nodes(e);
        for (int q = 0; q < 4; ++q) {
            const auto w = gauss_shape_weights(q);
            for (int a = 0; a < 4; ++a) {
                num(nodes[a]) += w[a] * gauss_field(4 * e + q);
                den(nodes[a]) += w[a];
            }
        }
    }
    for (int i = 0; i < g.node_count(); ++i) {
        num(i) = den(i) > 0.0 ? num(i) / den(i) : 0.0;
    }
    return num;
}

LevelSetState hj_step(const LevelSetState& state, const Vec& nodal_sensitivity, double dt, double c1,
                      double clamp) {
    const auto mask = state.layout.design_nodes();
    if (nodal_sensitivity.size() != state.layout.phi.size()) {
        throw Error(ErrorKind::StateError, "sensitivity field does not match the level set");
    }
    LevelSetState next = state;
    for (Eigen::Index i = 0; i < next.layout.phi.size(); ++i) {
        if (!mask[i]) continue;
        const double v = next.layout.phi(i) - dt * c1 * nodal_sensitivity(i);
        next.layout.phi(i) = std::clamp(v, -clamp, clamp);
    }
    return next;
}

bool detect_instability(const std::vector<IterationRecord>& history, int window) {
    const int n = static_cast<int>(history.size());
    for (int i = 1; i < n; ++i) {
        const double ri = std::log10(history[i].lambda_star1 / history[i - 1].lambda_star1);
        if (std::abs(ri) <= 1.0) continue;
        for (int j = i + 1; j < std::min(n, i + 1 + window); ++j) {
            const double rj = std::log10(history[j].lambda_star1 / history[j - 1].lambda_star1);
            if (std::abs(rj) > 1.0 && rj * ri < 0.0) return true;
        }
    }
    return false;
}

namespace {

IterationRecord make_record(int iter, const DesignEvaluation& ev, double step) {
    IterationRecord r;
    r.iter = iter;
    r.pi = ev.cost.pi;
    r.f = ev.cost.f;
    r.g = ev.cost.g;
    r.lambda_star1 = ev.lambda_star;
    r.lambda1 = ev.lambda;
    r.vol_frac_dense = ev.volumes.dense;
    r.vol_frac_soft = ev.volumes.soft;
    r.step = step;
    return r;
}

}  // namespace

OptimizationResult optimize(const StructuredGrid& grid, const PhaseSet& phases,
                            const OptimizerSettings& settings, const IterationObserver& observer,
                            const std::optional<Vec>& initial_phi) {
    if (!(settings.target_hz > 0.0)) throw Error(ErrorKind::InvalidArgument, "target frequency must be positive");
    if (!(settings.dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
    if (settings.max_iters < 0) throw Error(ErrorKind::InvalidArgument, "max_iters must be >= 0");
    if (settings.check_feasibility) {
        const double limit = feasibility_lower_limit({phases.frame, phases.dense, phases.soft},
                                                     std::max(grid.lx, grid.ly));
        if (hz_to_rad(settings.target_hz) < limit) {
            throw Error(ErrorKind::Feasibility,
                        "target " + std::to_string(settings.target_hz) +
                            " Hz is below the feasibility limit of " +
                            std::to_string(rad_to_hz(limit)) + " Hz");
        }
    }

    const RveEvaluator evaluator(grid, phases, settings);
    LevelSetState state;
    state.layout = make_layout(grid, settings.frame_fraction, settings.initial_phi);
    if (initial_phi) {
        if (initial_phi->size() != state.layout.phi.size()) {
            throw Error(ErrorKind::InvalidArgument, "initial level set does not match the grid");
        }
        state.layout.phi = *initial_phi;
    }

    DesignEvaluation current = evaluator.evaluate(state.layout);
    state.history.push_back(make_record(0, current, 0.0));
    if (observer) observer(state, current);

    Vec sens = evaluator.nodal_sensitivity(state.layout, evaluator.gauss_sensitivity(state.layout, current));
    const double smax = sens.cwiseAbs().maxCoeff();
    const double phi_amp = std::max(state.layout.phi.cwiseAbs().maxCoeff(), 1e-12);
    double c1 = settings.c1.value_or(smax > 0.0 ? 0.1 * phi_amp / (settings.dt * smax) : 1.0);

    double step = 1.0;
    int stall = 0;
    state.stop_reason = "max_iters";
    for (int it = 1; it <= settings.max_iters; ++it) {
        if (current.cost.pi < settings.stop_tol) {
            state.stop_reason = "converged";
            break;
        }
        if (!(sens.cwiseAbs().maxCoeff() > 0.0)) {
            state.stop_reason = "zero-sensitivity";
            break;
        }
        bool accepted = false;
        LevelSetState trial;
        DesignEvaluation trial_eval;
        for (int h = 0; h <= settings.max_halvings && step >= settings.min_step; ++h) {
            trial = hj_step(state, sens, settings.dt * step, c1, settings.phi_clamp);
            const auto trial_phases = gauss_phases(trial.layout);
            if (trial_phases == current.phases) {
                trial_eval = current;  // same topology, same spectrum
                accepted = true;
                break;
            }
            bool ok = true;
            try {
                trial_eval = evaluator.evaluate(trial.layout);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NoRelevantMode && e.kind() != ErrorKind::SolverFailure &&
                    e.kind() != ErrorKind::InvalidArgument) {
                    throw;
                }
                ok = false;
            }
            if (ok && trial_eval.cost.pi <= current.cost.pi * (1.0 + settings.increase_tolerance)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // Every useful step flips material the wrong way: the design sits at
            // the resolution limit of the grid.
            state.stagnated = true;
            state.stop_reason = "stagnated";
            break;
        }
        const bool improved = trial_eval.cost.pi < current.cost.pi;
        trial.iteration = it;
        trial.history.push_back(make_record(it, trial_eval, step));
        state = std::move(trial);
        current = std::move(trial_eval);
        step = std::min(1.0, step * settings.step_growth);
        if (observer) observer(state, current);

        stall = improved ? 0 : stall + 1;
        if (stall > settings.stall_limit) {
            state.stagnated = true;
            state.stop_reason = "stagnated";
            break;
        }
        sens = evaluator.nodal_sensitivity(state.layout, evaluator.gauss_sensitivity(state.layout, current));
    }
    if (state.stop_reason == "max_iters" && current.cost.pi < settings.stop_tol) {
        state.stop_reason = "converged";
    }
    state.instability_warning = detect_instability(state.history);
    return {std::move(state), std::move(current), c1};
}

}  // namespace lram
