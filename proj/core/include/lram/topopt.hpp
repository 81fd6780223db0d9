#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lram/constraints.hpp"
#include "lram/modal.hpp"
#include "lram/rve.hpp"

namespace lram {

// omega_min = sqrt(min(K + 4G/3) / max(rho)) / cell_size, rad/s.
double feasibility_lower_limit(const std::vector<MaterialPhase>& phases, double cell_size);

struct CostBreakdown {
    double pi = 0.0;
    double f = 0.0;
    double g = 0.0;
    double alpha = 1.0;
    double target_lambda = 0.0;
    // dPi/dlambda_star and dPi/dlambda.
    double d_lambda_star = 0.0;
    double d_lambda = 0.0;
};

// Pi = alpha f^2 + (1 - alpha) g^2 with
// f = (ln ls - ln lt) / (ln ls + ln lt), g = ln ls / ln l.
CostBreakdown evaluate_cost(double lambda_star, double lambda, double target_lambda, double alpha);

struct OptimizerSettings {
    double target_hz = 1000.0;
    double alpha = 1.0;
    double dt = 1e-3;
    std::optional<double> c1;  // auto: first step moves phi by 0.1 at most
    int max_iters = 1000;
    double stop_tol = 1e-7;
    double delta_tol = 1e-3;
    int mode_count = 12;
    double frame_fraction = 0.05;
    // Treat the frame as rigid through constraints (the limit of the stiffness
    // scaling); otherwise only scaling.frame_stiffness stiffens it.
    bool rigid_frame = true;
    PropertyScaling scaling{1e10, 1e-10};
    double interp_exponent = 2.0;
    double phi_clamp = 10.0;
    double initial_phi = 1.0;
    // Step control: a trial step that raises Pi is retried at half length.
    int max_halvings = 12;
    double min_step = 1e-6;
    // Relative rise of Pi a step may cause and still be accepted.
    double increase_tolerance = 0.0;
    double step_growth = 1.25;
    int stall_limit = 40;
    bool check_feasibility = true;
};

struct IterationRecord {
    int iter = 0;
    double pi = 0.0;
    double f = 0.0;
    double g = 0.0;
    double lambda_star1 = 0.0;
    double lambda1 = 0.0;
    double vol_frac_dense = 0.0;
    double vol_frac_soft = 0.0;
    double step = 0.0;  // pseudo-time step multiplier actually used
};

// Everything the optimizer knows about one design.
struct DesignEvaluation {
    std::vector<Phase> phases;
    ModalSolution restricted;
    ModalSolution unrestricted;
    int first_restricted = -1;
    int first_unrestricted = -1;
    double lambda_star = 0.0;
    double lambda = 0.0;
    CostBreakdown cost;
    VolumeFractions volumes;
};

// Assembles and solves the restricted and unrestricted systems of an RVE
// design. Constraint operators are built once per grid.
class RveEvaluator {
public:
    RveEvaluator(const StructuredGrid& grid, PhaseSet phases, const OptimizerSettings& settings);

    DesignEvaluation evaluate(const RveLayout& layout) const;
    // Pointwise dPi/dchi at Gauss points (zero on the frame).
    Vec gauss_sensitivity(const RveLayout& layout, const DesignEvaluation& ev) const;
    // Shape-weighted projection of a Gauss-point field onto design nodes.
    Vec nodal_sensitivity(const RveLayout& layout, const Vec& gauss_field) const;

    // d lambda / d chi at Gauss points for one full-length mode.
    Vec eigen_sensitivity(const RveLayout& layout, const std::vector<Phase>& phases,
                          const Vec& mode_full, double lambda) const;

    const ConstraintOperators& restricted_ops() const { return restricted_; }
    const ConstraintOperators& unrestricted_ops() const { return unrestricted_; }
    const ScaledPhases& properties() const { return props_; }
    double target_lambda() const;

private:
    ModalSolution solve_relevant(const SpMat& K, const SpMat& M, bool restricted,
                                 const Mat& op, const Mat* rigid, int& first) const;

    StructuredGrid grid_;
    OptimizerSettings settings_;
    ScaledPhases props_;
    ConstraintOperators restricted_;
    ConstraintOperators unrestricted_;
};

struct LevelSetState {
    RveLayout layout;
    int iteration = 0;
    std::vector<IterationRecord> history;
    bool stagnated = false;
    bool instability_warning = false;
    std::string stop_reason;
};

// phi <- clamp(phi - dt c1 s) on design nodes only.
LevelSetState hj_step(const LevelSetState& state, const Vec& nodal_sensitivity, double dt, double c1,
                      double clamp = 10.0);

struct OptimizationResult {
    LevelSetState state;
    DesignEvaluation final_eval;
    double c1 = 0.0;
};

// Called after every accepted iteration (and for iteration 0).
using IterationObserver = std::function<void(const LevelSetState&, const DesignEvaluation&)>;

OptimizationResult optimize(const StructuredGrid& grid, const PhaseSet& phases,
                            const OptimizerSettings& settings,
                            const IterationObserver& observer = {},
                            const std::optional<Vec>& initial_phi = std::nullopt);

// Flags a jump of more than a decade in lambda_star that reverses within `window` iterations.
bool detect_instability(const std::vector<IterationRecord>& history, int window = 5);

}  // namespace lram
