#include <gtest/gtest.h>

#include <cmath>

#include "lram/errors.hpp"
#include "lram/rve.hpp"
#include "lram/topopt.hpp"

using namespace lram;

namespace {

// Mild-contrast phases for derivative checks.
PhaseSet mild() {
    PhaseSet p;
    p.frame = {"frame", 2000.0, 4e9, 2e9, 0.0};
    p.dense = {"dense", 2000.0, 4e9, 2e9, 0.0};
    p.soft = {"soft", 200.0, 4e8, 2e8, 0.0};
    return p;
}

OptimizerSettings plain(double exponent) {
    OptimizerSettings s;
    s.scaling = {1.0, 1.0};
    s.rigid_frame = false;
    s.interp_exponent = exponent;
    s.check_feasibility = false;
    return s;
}

// Soft ring around a dense core on the design domain.
RveLayout ring_layout(const StructuredGrid& g) {
    RveLayout l = make_layout(g, 0.05);
    for (int n = 0; n < g.node_count(); ++n) {
        const double r = (g.nodes[n] - g.centroid).norm() / g.lx;
        l.phi(n) = (r < 0.18 || r > 0.36) ? 1.0 : -1.0;
    }
    return l;
}

}  // namespace

TEST(Feasibility, TableOnePhases) {
    const PhaseSet p;
    const double w = feasibility_lower_limit({p.frame, p.dense, p.soft}, 0.01);
    EXPECT_NEAR(w, std::sqrt((0.63e6 + 4.0 / 3.0 * 0.04e6) / 7780.0) / 0.01, 1e-9);
    EXPECT_NEAR(rad_to_hz(w), 149.0, 0.5);
    EXPECT_NEAR(feasibility_lower_limit({{"u", 1.0, 0.5, 0.375, 0.0}}, 1.0), 1.0, 1e-12);
    EXPECT_NEAR(feasibility_lower_limit({p.frame, p.dense, p.soft}, 0.02), 0.5 * w, 1e-12);
}

TEST(Cost, ExactFitAndFormula) {
    const double lt = std::pow(2 * kPi * 1000.0, 2);
    EXPECT_NEAR(evaluate_cost(lt, 3 * lt, lt, 1.0).pi, 0.0, 1e-15);
    const auto c = evaluate_cost(lt, std::exp(1.0) * lt, lt, 0.5);
    const double g = std::log(lt) / (std::log(lt) + 1.0);
    EXPECT_NEAR(c.f, 0.0, 1e-15);
    EXPECT_NEAR(c.g, g, 1e-14);
    EXPECT_NEAR(c.pi, 0.5 * g * g, 1e-14);
    EXPECT_EQ(evaluate_cost(2 * lt, 3 * lt, lt, 1.0).d_lambda, 0.0);
}

TEST(Cost, BoundedAndMonotone) {
    const double lt = 4e7;
    double prev = 2.0;
    for (double ratio = 1.1; ratio < 50.0; ratio *= 1.3) {
        const auto c = evaluate_cost(1.5 * lt, 1.5 * lt * ratio, lt, 0.5);
        EXPECT_GE(c.pi, 0.0);
        EXPECT_LE(c.pi, 1.0);
        EXPECT_LT(c.pi, prev);
        prev = c.pi;
    }
    EXPECT_THROW(evaluate_cost(lt, lt, lt, 1.5), Error);
}

TEST(Cost, DerivativesMatchFiniteDifference) {
    const double lt = 4e7, ls = 9e7, l = 5e8;
    for (double a : {0.0, 0.5, 1.0}) {
        const auto c = evaluate_cost(ls, l, lt, a);
        const double h1 = 1e-4 * ls, h2 = 1e-4 * l;
        const double fd1 = (evaluate_cost(ls + h1, l, lt, a).pi - evaluate_cost(ls - h1, l, lt, a).pi) / (2 * h1);
        const double fd2 = (evaluate_cost(ls, l + h2, lt, a).pi - evaluate_cost(ls, l - h2, lt, a).pi) / (2 * h2);
        EXPECT_NEAR(c.d_lambda_star, fd1, 1e-6 * std::abs(fd1) + 1e-30);
        EXPECT_NEAR(c.d_lambda, fd2, 1e-6 * std::abs(fd2) + 1e-30);
    }
}

TEST(Layout, FrameIsNineteenPercent) {
    const auto g = build_grid(100, 100, 0.01);
    const auto l = make_layout(g, 0.05);
    EXPECT_EQ(l.frame_x, 5);
    const auto v = volume_fractions(gauss_phases(l));
    EXPECT_NEAR(v.frame, 0.19, 1e-12);
    EXPECT_NEAR(v.dense, 0.81, 1e-12);
}

TEST(HjStep, ZeroAndUniformSensitivity) {
    const auto g = build_grid(10, 10, 0.01);
    LevelSetState st;
    st.layout = make_layout(g, 0.05);
    const auto next = hj_step(st, Vec::Zero(g.node_count()), 1e-3, 5.0);
    EXPECT_EQ((next.layout.phi - st.layout.phi).norm(), 0.0);
    const auto moved = hj_step(st, Vec::Constant(g.node_count(), 2.0), 1e-3, 5.0);
    const auto mask = st.layout.design_nodes();
    for (int n = 0; n < g.node_count(); ++n) {
        EXPECT_NEAR(moved.layout.phi(n), mask[n] ? 1.0 - 1e-2 : 1.0, 1e-15);
    }
    // Clamp.
    const auto clamped = hj_step(st, Vec::Constant(g.node_count(), 1e6), 1.0, 1.0, 10.0);
    for (int n = 0; n < g.node_count(); ++n) {
        if (mask[n]) EXPECT_EQ(clamped.layout.phi(n), -10.0);
    }
}

TEST(Sensitivity, FrameGetsNothingAndAlphaOneDropsG) {
    const auto g = build_grid(12, 12, 0.01);
    const RveEvaluator ev(g, mild(), plain(2.0));
    const auto l = ring_layout(g);
    const auto d = ev.evaluate(l);
    EXPECT_EQ(d.cost.d_lambda, 0.0);  // alpha = 1 by default
    const Vec s = ev.gauss_sensitivity(l, d);
    for (int e = 0; e < g.element_count(); ++e) {
        if (!l.frame_element(e)) continue;
        for (int q = 0; q < 4; ++q) EXPECT_EQ(s(4 * e + q), 0.0);
    }
}

TEST(Sensitivity, SmallChiPerturbationExponentTwo) {
    // d lambda / d chi against a partial-chi perturbation of one Gauss point.
    const auto g = build_grid(10, 10, 0.01);
    const OptimizerSettings set = plain(2.0);
    const RveEvaluator ev(g, mild(), set);
    const auto l = ring_layout(g);
    const auto d = ev.evaluate(l);
    const Vec mode = ev.restricted_ops().P * d.restricted.modes.col(d.first_restricted);
    const Vec sens = ev.eigen_sensitivity(l, d.phases, mode, d.lambda_star);
    const double w = g.hx() * g.hy() / 4.0;
    const auto& pr = ev.properties();
    const SpMat& P = ev.restricted_ops().P;
    const SpMat PT = P.transpose();
    const auto base = material_field(g, d.phases, pr, false);

    const double smax = w * sens.cwiseAbs().maxCoeff();
    int checked = 0;
    for (int gp = 0; gp < g.gauss_count(); gp += 7) {
        if (l.frame_element(gp / 4)) continue;
        const bool dense = d.phases[gp] == Phase::Dense;
        const double delta = dense ? -0.01 : 0.01;
        const double chi = (dense ? 1.0 : 0.0) + delta;
        auto f = base;
        const double K = interpolate(chi, {set.interp_exponent, pr.dense.bulk, pr.soft.bulk}).value;
        const double G = interpolate(chi, {set.interp_exponent, pr.dense.shear, pr.soft.shear}).value;
        f.rho[gp] = interpolate(chi, {set.interp_exponent, pr.dense.rho, pr.soft.rho}).value;
        f.stiffness[gp] = plane_strain_stiffness(K, G);
        const auto sys = assemble(g, f, {true, false, true});
        ModalOptions o;
        o.count = d.first_restricted + 3;
        const auto s = solve_smallest(PT * sys.K * P, PT * sys.M * P, o);
        const double fd = (s.eigenvalues(d.first_restricted) - d.lambda_star) / delta;
        const double pred = w * sens(gp);
        if (std::abs(pred) < 0.05 * smax) continue;
        EXPECT_NEAR(fd, pred, 0.1 * std::abs(pred)) << "gauss point " << gp;
        ++checked;
    }
    EXPECT_GT(checked, 10);
}

TEST(Optimize, AlreadyOptimalTarget) {
    const auto g = build_grid(20, 20, 0.01);
    OptimizerSettings s;
    const RveEvaluator ev(g, PhaseSet{}, s);
    const auto l0 = make_layout(g, s.frame_fraction);
    const double ls = ev.evaluate(l0).lambda_star;
    s.target_hz = rad_to_hz(std::sqrt(ls));
    const auto r = optimize(g, PhaseSet{}, s);
    EXPECT_LE(r.state.iteration, 2);
    EXPECT_LT(r.final_eval.cost.pi, 1e-20);
}

TEST(Optimize, InfeasibleTargetRejected) {
    const auto g = build_grid(20, 20, 0.01);
    OptimizerSettings s;
    s.target_hz = 50.0;
    try {
        optimize(g, PhaseSet{}, s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Feasibility);
    }
}

TEST(Optimize, FreshEvaluationReproducesHistory) {
    const auto g = build_grid(40, 40, 0.01);
    OptimizerSettings s;
    s.max_iters = 15;
    const auto r = optimize(g, PhaseSet{}, s);
    ASSERT_FALSE(r.state.history.empty());
    const RveEvaluator ev(g, PhaseSet{}, s);
    const auto d = ev.evaluate(r.state.layout);
    EXPECT_NEAR(d.lambda_star, r.state.history.back().lambda_star1, 1e-10 * d.lambda_star);
    EXPECT_NEAR(d.lambda, r.state.history.back().lambda1, 1e-10 * d.lambda);
    for (std::size_t i = 1; i < r.state.history.size(); ++i) {
        EXPECT_LE(r.state.history[i].pi, r.state.history[i - 1].pi * 1.01);
    }
    // The frame never changes.
    const auto v0 = volume_fractions(gauss_phases(make_layout(g, s.frame_fraction)));
    EXPECT_NEAR(d.volumes.frame, v0.frame, 1e-15);
}

TEST(Instability, DetectsDecadeJumpThatReverses) {
    std::vector<IterationRecord> h(8);
    for (int i = 0; i < 8; ++i) {
        h[i].iter = i;
        h[i].lambda_star1 = 1e8;
    }
    EXPECT_FALSE(detect_instability(h));
    h[4].lambda_star1 = 1e6;
    EXPECT_TRUE(detect_instability(h));
    for (int i = 4; i < 8; ++i) h[i].lambda_star1 = 1e6;  // one-way drop: disengagement, not instability
    EXPECT_FALSE(detect_instability(h));
}
