#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "scnet/constants.hpp"
#include "scnet/decompose.hpp"
#include "scnet/dynamics.hpp"
#include "scnet/quantize.hpp"

using namespace scnet;

namespace {

double max_rel_diff(const Mat& a, const Mat& b) {
    double scale = a.cwiseAbs().maxCoeff();
    return (a - b).cwiseAbs().maxCoeff() / (scale > 0 ? scale : 1.0);
}

/// Initial state with the junctions displaced and the loop currents at rest in the inductor fluxes.
ClassicalState kicked(const CircuitTopology& t, double frac) {
    ClassicalState s = ClassicalState::zero(t.n(), t.l());
    for (Eigen::Index i = 0; i < s.Phi.size(); ++i) s.Phi(i) = frac * kFluxQuantum * (1.0 + 0.3 * double(i));
    for (Eigen::Index i = 0; i < s.Q.size(); ++i) s.Q(i) = 0.05 * kCooperPairCharge * double(i + 1);
    s.Phi_dot = Vec::Zero(s.Phi.size());
    if (t.l()) s.Q_dot = -spd_inverse(t.L) * to_real(t.Omega).transpose() * s.Phi;
    return s;
}

double energy_scale(const CircuitTopology& t, const StateTrajectory& tr) {
    double kin = 0.0;
    for (std::size_t k = 0; k < tr.samples(); ++k) {
        ClassicalState s = tr.state(k);
        kin = std::max(kin, 0.5 * s.Phi_dot.dot(t.C * s.Phi_dot) + 0.5 * s.Q_dot.dot(t.L * s.Q_dot));
    }
    return kin + t.E_J.cwiseAbs().sum() + t.E_S.cwiseAbs().sum();
}

}  // namespace

TEST_CASE("LC oscillator") {
    const double C = 1e-12, Lv = 1e-9, amp = 0.1 * kFluxQuantum;
    auto t = build_topology(fixtures::lc(C, Lv)).topology;
    const double w = 1.0 / std::sqrt(Lv * C), T = kTwoPi / w;
    CHECK(characteristic_period(t, ClassicalState::zero(1, 1)) == doctest::Approx(T).epsilon(1e-10));

    ClassicalState s = ClassicalState::zero(1, 1);
    s.Phi(0) = amp;
    s.Q_dot = -spd_inverse(t.L) * to_real(t.Omega).transpose() * s.Phi;
    StateTrajectory tr = integrate(t, s, 10 * T, T / 1000);
    REQUIRE(tr.samples() == 10001);
    double err = 0.0;
    for (std::size_t k = 0; k < tr.samples(); ++k)
        err = std::max(err, std::abs(tr.Phi(Eigen::Index(k), 0) - amp * std::cos(w * tr.t[k])));
    CHECK(err / amp <= 1e-6);

    SUBCASE("voltage kick gives a sine") {
        ClassicalState v = ClassicalState::zero(1, 1);
        v.Phi_dot(0) = amp * w;
        StateTrajectory tv = integrate(t, v, 2 * T, T / 1000);
        double e2 = 0.0;
        for (std::size_t k = 0; k < tv.samples(); ++k)
            e2 = std::max(e2, std::abs(tv.Phi(Eigen::Index(k), 0) - amp * std::sin(w * tv.t[k])));
        CHECK(e2 / amp <= 1e-6);
    }
}

TEST_CASE("energy conservation") {
    SUBCASE("fluxonium with small E_J over ten periods") {
        auto t = build_topology(fixtures::fluxonium(5e-15, 300e-9, fixtures::energy_hz(0.5e9))).topology;
        ClassicalState s = kicked(t, 0.2);
        double T = characteristic_period(t, s);
        StateTrajectory tr = integrate(t, s, 10 * T, T / 1000);
        double drift = (tr.energy.array() - tr.energy(0)).abs().maxCoeff() / energy_scale(t, tr);
        CHECK(drift <= 1e-8);
    }
    SUBCASE("all fixtures over 1e4 steps") {
        for (const auto& net : {fixtures::lc(), fixtures::transmon(), fixtures::fluxonium(), fixtures::rf_squid(),
                                fixtures::dc_squid(), fixtures::gmon(), fixtures::mixed(),
                                fixtures::inductive_coupler(), fixtures::TwoNodeThreeLoop{}.netlist()}) {
            auto t = build_topology(net).topology;
            ClassicalState s = kicked(t, 0.15);
            double T = characteristic_period(t, s);
            StateTrajectory tr = integrate(t, s, 10 * T, T / 1000, {10});
            double drift = (tr.energy.array() - tr.energy(0)).abs().maxCoeff() / energy_scale(t, tr);
            CHECK(drift <= 1e-7);
        }
    }
}

TEST_CASE("static equilibrium") {
    auto t = build_topology(fixtures::transmon()).topology;
    StateTrajectory tr = integrate(t, ClassicalState::zero(1, 0), 1e-9, 1e-12);
    CHECK(tr.Phi.cwiseAbs().maxCoeff() == 0.0);
    CHECK(tr.Phi_J.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("integration errors") {
    auto t = build_topology(fixtures::transmon()).topology;
    CHECK_THROWS_AS(integrate(t, ClassicalState::zero(2, 0), 1e-9, 1e-12), std::invalid_argument);
    CHECK_THROWS_AS(integrate(t, ClassicalState::zero(1, 0), 1e-9, 0.0), std::invalid_argument);
    auto lc = build_topology(fixtures::lc()).topology;
    ClassicalState s = ClassicalState::zero(1, 1);
    s.Phi_dot(0) = 1.0;
    CHECK_THROWS_AS(integrate(lc, s, 1e-6, 1e-9), NumericError);
}

TEST_CASE("drives") {
    SUBCASE("a charge ramp on an LC moves the equilibrium") {
        const double C = 1e-12, Lv = 1e-9;
        auto t = build_topology(fixtures::lc(C, Lv)).topology;
        const double T = kTwoPi * std::sqrt(Lv * C);
        t.q_drive.times = {0.0, 100 * T};
        t.q_drive.values = Mat(2, 1);
        t.q_drive.values << 0.0, 1e-15;
        StateTrajectory tr = integrate(t, ClassicalState::zero(1, 1), 5 * T, T / 1000);
        CHECK(tr.Phi.cwiseAbs().maxCoeff() > 0.0);
    }
    SUBCASE("a constant drive has no effect") {
        auto t = build_topology(fixtures::rf_squid()).topology;
        ClassicalState s = kicked(t, 0.1);
        StateTrajectory a = integrate(t, s, 1e-10, 1e-13);
        t.q_drive.times = {0.0, 1.0};
        t.q_drive.values = Mat::Constant(2, 1, 3e-19);
        StateTrajectory b = integrate(t, s, 1e-10, 1e-13);
        CHECK(compare_observables(a, b).flux == 0.0);
    }
}

TEST_CASE("compare_observables") {
    auto t = build_topology(fixtures::fluxonium()).topology;
    ClassicalState s = kicked(t, 0.2);
    double T = characteristic_period(t, s);
    StateTrajectory a = integrate(t, s, 2 * T, T / 500);
    CHECK(compare_observables(a, a).relative() == 0.0);
    ClassicalState p = s;
    p.Phi(0) *= 1.01;
    StateTrajectory b = integrate(t, p, 2 * T, T / 500);
    CHECK(compare_observables(a, b).relative() > 1e-4);
    StateTrajectory c = integrate(t, s, T, T / 500);
    CHECK_THROWS_AS(compare_observables(a, c), std::invalid_argument);
}

TEST_CASE("decomposition invariance") {
    for (const auto& net : {fixtures::fluxonium(), fixtures::gmon(), fixtures::inductive_coupler(),
                            fixtures::mixed(), fixtures::dc_squid()}) {
        auto t = build_topology(net).topology;
        auto [es, ff] = fundamental_decomposition(to_edge_basis(t, find_tree_cotree(t)));
        REQUIRE(es.removal->empty());
        ClassicalState s = kicked(t, 0.2);
        double T = characteristic_period(t, s);
        StateTrajectory a = integrate(t, s, 3 * T, T / 1000);
        StateTrajectory b = integrate(es.topology, transform_state(s, es.U_total, es.W_total), 3 * T, T / 1000);
        CHECK(compare_observables(a, b).relative() <= 1e-6);
    }
}

TEST_CASE("random structure-preserving steps keep the nonlinear trajectories") {
    std::mt19937_64 rng(5);
    auto t = build_topology(fixtures::mixed()).topology;
    EdgeSystem es = to_edge_basis(t, find_tree_cotree(t));
    const StepKind kinds[] = {StepKind::RowPivot, StepKind::ColPivot, StepKind::RowAdd, StepKind::ColAdd};
    for (int k = 0; k < 60; ++k) {
        StepOp op{kinds[rng() % 4], rng() % es.topology.n(), rng() % es.topology.l(),
                  static_cast<std::int64_t>(rng() % 3) - 1};
        if (op.kind == StepKind::RowAdd) op.j = rng() % es.topology.n();
        if (op.kind == StepKind::ColAdd) op.i = rng() % es.topology.l();
        try {
            es = structure_preserving_step(es, op);
        } catch (const std::exception&) {
        }
    }
    ClassicalState s = kicked(t, 0.2);
    double T = characteristic_period(t, s);
    StateTrajectory a = integrate(t, s, 3 * T, T / 1000);
    StateTrajectory b = integrate(es.topology, transform_state(s, es.U_total, es.W_total), 3 * T, T / 1000);
    CHECK(compare_observables(a, b).relative() <= 1e-6);
}

TEST_CASE("free-mode removal fidelity") {
    SUBCASE("capacitive island") {
        BranchNetlist net = fixtures::nodes(3);
        net.branches = {fixtures::jj(1, 0, 6e-15, fixtures::energy_hz(9e9), "J"), fixtures::ind(1, 0, 2e-9, "L"),
                        fixtures::cap(1, 2, 10e-15, "Cc"), fixtures::cap(2, 0, 30e-15, "Cg")};
        auto t = build_topology(net).topology;
        auto [r, rec] = remove_free_modes(t);
        REQUIRE(rec.alpha.size() == 1);
        ClassicalState s = transform_state(kicked(t, 0.2), rec.U, rec.W);
        s.Phi_dot(Eigen::Index(rec.alpha[0])) = 1e3;
        double T = characteristic_period(t, s);
        StateTrajectory full = integrate(apply_basis_change(t, rec.U, rec.W), s, 5 * T, T / 1000);
        StateTrajectory red = integrate(r, restrict_state(s, rec.kept_nodes, rec.kept_loops), 5 * T, T / 1000);
        CHECK(compare_observables(full, red).relative() <= 1e-6);
    }
    SUBCASE("inductive loop") {
        auto t = build_topology(fixtures::TwoNodeThreeLoop{}.netlist()).topology;
        auto [r, rec] = remove_free_modes(t);
        REQUIRE(rec.beta.size() == 1);
        ClassicalState s = transform_state(kicked(t, 0.2), rec.U, rec.W);
        double T = characteristic_period(t, s);
        StateTrajectory full = integrate(apply_basis_change(t, rec.U, rec.W), s, 5 * T, T / 1000);
        StateTrajectory red = integrate(r, restrict_state(s, rec.kept_nodes, rec.kept_loops), 5 * T, T / 1000);
        Mat fullQ(full.Q.rows(), Eigen::Index(rec.kept_loops.size()));
        for (std::size_t c = 0; c < rec.kept_loops.size(); ++c)
            fullQ.col(Eigen::Index(c)) = full.Q.col(Eigen::Index(rec.kept_loops[c]));
        CHECK(max_rel_diff(fullQ, red.Q) <= 1e-6);
        CHECK(max_rel_diff(full.Phi, red.Phi) <= 1e-6);
    }
}
