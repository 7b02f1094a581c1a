#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "scnet/constants.hpp"
#include "scnet/errors.hpp"
#include "scnet/quantize.hpp"

using namespace scnet;

namespace {

constexpr double e2 = kCooperPairCharge;
constexpr double phi0 = kFluxQuantum;

/// Hamiltonian in the original node/loop basis with conjugate pairs (Φ, Π) and (Q, P).
double original_hamiltonian(const CircuitTopology& t, const Vec& Phi, const Vec& Pi, const Vec& Q, const Vec& P) {
    Mat O = to_real(t.Omega);
    Vec xc = Pi - t.Q_ext + O * Q;
    Vec xl = P - t.Phi_ext;
    double h = 0.5 * xc.dot(t.C.inverse() * xc) + 0.5 * xl.dot(t.L.inverse() * xl);
    Vec argJ = to_real(t.A_J).transpose() * Phi;
    Vec argS = to_real(t.B_S).transpose() * Q;
    for (Eigen::Index i = 0; i < argJ.size(); ++i) h -= t.E_J(i) * std::cos(kTwoPi / phi0 * argJ(i));
    for (Eigen::Index i = 0; i < argS.size(); ++i) h -= t.E_S(i) * std::cos(kTwoPi / e2 * argS(i));
    return h;
}

PhasePoint random_point(std::mt19937_64& rng, const HamiltonianModel& m) {
    std::normal_distribution<double> g;
    std::uniform_int_distribution<int> d(-3, 3);
    auto k = static_cast<Eigen::Index>(m.modes.k()), j = static_cast<Eigen::Index>(m.modes.j()),
         s = static_cast<Eigen::Index>(m.modes.s());
    PhasePoint p;
    p.Q_k = Vec(k);
    p.P_k = Vec(k);
    p.n_j = Vec(j);
    p.phi_j = Vec(j);
    p.m_s = Vec(s);
    p.q_s = Vec(s);
    for (Eigen::Index i = 0; i < k; ++i) {
        p.Q_k(i) = 0.7 * e2 * g(rng);
        p.P_k(i) = 0.4 * phi0 * g(rng);
    }
    for (Eigen::Index i = 0; i < j; ++i) {
        p.n_j(i) = d(rng);
        p.phi_j(i) = kTwoPi * g(rng);
    }
    for (Eigen::Index i = 0; i < s; ++i) {
        p.m_s(i) = d(rng);
        p.q_s(i) = kTwoPi * g(rng);
    }
    return p;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

TEST_CASE("remove_free_modes") {
    SUBCASE("no free modes leaves the topology unchanged") {
        auto t = build_topology(fixtures::fluxonium()).topology;
        auto [r, rec] = remove_free_modes(t);
        CHECK(rec.empty());
        CHECK(r.C == t.C);
        CHECK(r.Omega == t.Omega);
    }
    SUBCASE("purely capacitive island is eliminated by a Schur complement") {
        double c11 = 3e-14, c12 = -1e-14, c22 = 5e-14, q1 = 0.3 * e2, q2 = 0.2 * e2;
        Mat C(2, 2);
        C << c11, c12, c12, c22;
        auto t = make_topology(C, Mat(0, 0), IntMatrix{{1}, {0}}, IntMatrix(0, 0), IntMatrix(2, 0));
        t.Q_ext << q1, q2;
        t.E_J << 1e-23;
        auto [r, rec] = remove_free_modes(t);
        REQUIRE(rec.alpha == std::vector<std::size_t>{1});
        CHECK(r.n() == 1);
        CHECK(r.C(0, 0) == doctest::Approx(c11 - c12 * c12 / c22).epsilon(1e-14));
        CHECK(r.Q_ext(0) == doctest::Approx(q1 - c12 / c22 * q2).epsilon(1e-14));
        CHECK(r.A_J == IntMatrix{{1}});
    }
    SUBCASE("free loop eliminated on the inductive side") {
        auto n = fixtures::nodes(2);
        n.branches = {fixtures::jj(1, 0, 5e-15, 1e-23), fixtures::ind(1, 0, 1e-9, "L1"), fixtures::ind(1, 0, 2e-9, "L2")};
        auto t = build_topology(n).topology;
        auto [r, rec] = remove_free_modes(t);
        CHECK(rec.beta.size() == 1);
        CHECK(r.l() == 1);
        // parallel inductors combine
        CHECK(r.L(0, 0) == doctest::Approx(1e-9 * 2e-9 / 3e-9).epsilon(1e-12));
    }
    SUBCASE("dependent rows expose a free combination") {
        // two islands threaded by the same loop, no junctions: one combination is free
        auto n = fixtures::nodes(3);
        n.branches = {fixtures::cap(1, 0, 1e-14), fixtures::cap(2, 0, 2e-14), fixtures::ind(1, 2, 1e-9)};
        auto t = build_topology(n).topology;
        auto [r, rec] = remove_free_modes(t);
        CHECK(rec.alpha.size() == 1);
        CHECK(r.n() == 1);
        // series capacitance of the two grounded capacitors
        CHECK(r.C(0, 0) == doctest::Approx(1e-14 * 2e-14 / 3e-14).epsilon(1e-12));
    }
}

TEST_CASE("classify_and_reduce") {
    SUBCASE("fluxonium") {
        auto r = classify_and_reduce(build_topology(fixtures::fluxonium()).topology);
        CHECK(r.modes.k() == 1);
        CHECK(r.modes.j() == 0);
        CHECK(r.modes.s() == 0);
    }
    SUBCASE("junction only") {
        auto r = classify_and_reduce(build_topology(fixtures::transmon()).topology);
        CHECK(r.modes.k() == 0);
        CHECK(r.modes.j() == 1);
        CHECK(r.modes.s() == 0);
    }
    SUBCASE("phase-slip loop only") {
        auto t = make_topology(Mat(0, 0), Mat::Constant(1, 1, 1e-9), IntMatrix(0, 0), IntMatrix{{1}}, IntMatrix(0, 1));
        auto r = classify_and_reduce(t);
        CHECK(r.modes.k() == 0);
        CHECK(r.modes.j() == 0);
        CHECK(r.modes.s() == 1);
    }
    SUBCASE("coupler reduces to an identity block") {
        auto r = classify_and_reduce(build_topology(fixtures::gmon()).topology);
        CHECK(r.modes.k() == 2);
        CHECK(r.topology.Omega == IntMatrix{{1, 0}, {0, 1}, {0, 0}, {0, 0}});
        CHECK(r.modes.k() + r.modes.j() == 4);
        CHECK(r.modes.k() + r.modes.s() == 2);
    }
}

TEST_CASE("build_hamiltonian: fluxonium") {
    const double C = 5e-15, L = 300e-9, EJ = fixtures::energy_hz(4e9), ES = fixtures::energy_hz(1e9);
    auto h = build_hamiltonian(build_topology(fixtures::fluxonium(C, L, EJ, ES)).topology);
    CHECK(h.modes.k() == 1);
    CHECK(h.modes.j() == 0);
    CHECK(h.modes.s() == 0);
    CHECK(h.modes.removed_doubly_discrete == 1);
    CHECK(0.5 * h.capacitive.inverse(0, 0) == 1.0 / (2.0 * C));
    CHECK(0.5 * h.inductive.inverse(0, 0) == 1.0 / (2.0 * L));
    REQUIRE(h.junctions.size() == 1);
    REQUIRE(h.slips.size() == 1);
    CHECK(h.junctions[0].energy == EJ);
    CHECK(h.slips[0].energy == ES);
    CHECK(std::abs(h.junctions[0].coeff_ext[0]) == 1);
    CHECK(h.slips[0].coeff_ext == std::vector<std::int64_t>{1});
    CHECK(h.variables() == std::vector<std::string>{"Q_1", "P_1"});

    auto hs = to_standard_notation(h);
    CHECK(hs.junctions[0].coeff_ext == std::vector<std::int64_t>{-h.junctions[0].coeff_ext[0]});
    CHECK(hs.variables() == std::vector<std::string>{"Q_1", "Phi_1"});
    // H(Q, Phi) in standard notation equals H(Q, P = -Phi) in the default one
    std::mt19937_64 rng(1);
    for (int i = 0; i < 10; ++i) {
        PhasePoint p = random_point(rng, h), q = p;
        q.P_k = -p.P_k;
        CHECK(rel(evaluate_hamiltonian(h, p), evaluate_hamiltonian(hs, q)) < 1e-12);
    }
    // with the cos(2πΦ/Φ0) form of the junction term
    PhasePoint p;
    p.Q_k = Vec::Constant(1, 0.1 * e2);
    p.P_k = Vec::Constant(1, 0.2 * phi0);
    double expect = std::pow(0.1 * e2, 2) / (2 * C) + std::pow(0.2 * phi0, 2) / (2 * L) -
                    EJ * std::cos(kTwoPi * 0.2) - ES * std::cos(kTwoPi * 0.1);
    CHECK(rel(evaluate_hamiltonian(h, p), expect) < 1e-12);
}

TEST_CASE("build_hamiltonian: LC and transmon") {
    auto lc = build_hamiltonian(build_topology(fixtures::lc(2e-12, 3e-9)).topology);
    CHECK(lc.modes.k() == 1);
    CHECK(lc.junctions.empty());
    CHECK(lc.slips.empty());

    const double cj = 5e-15, cs = 60e-15, EJ = fixtures::energy_hz(15e9), qx = 0.25 * e2;
    auto net = fixtures::transmon(cj, cs, EJ);
    net.q_ext = {0.0, qx};
    auto tm = build_hamiltonian(build_topology(net).topology);
    CHECK(tm.modes.k() == 0);
    CHECK(tm.modes.j() == 1);
    REQUIRE(tm.junctions.size() == 1);
    CHECK(tm.junctions[0].coeff_compact == std::vector<std::int64_t>{1});
    CHECK(tm.variables() == std::vector<std::string>{"n_1", "phi_1"});
    PhasePoint p;
    p.n_j = Vec::Constant(1, 2.0);
    p.phi_j = Vec::Constant(1, 0.7);
    double expect = std::pow(2 * e2 - qx, 2) / (2 * (cj + cs)) - EJ * std::cos(0.7);
    CHECK(rel(evaluate_hamiltonian(tm, p), expect) < 1e-12);
}

TEST_CASE("evaluate_hamiltonian examples and errors") {
    const double EJ = 1e-23, ES = 2e-24, C = 5e-15;
    auto h = build_hamiltonian(build_topology(fixtures::fluxonium(C, 300e-9, EJ, ES)).topology);
    PhasePoint origin;
    origin.Q_k = Vec::Zero(1);
    origin.P_k = Vec::Zero(1);
    CHECK(evaluate_hamiltonian(h, origin) == doctest::Approx(-EJ - ES).epsilon(1e-14));

    auto lc = build_hamiltonian(build_topology(fixtures::lc(C, 1e-9)).topology);
    PhasePoint q0 = origin;
    q0.Q_k(0) = 3 * e2;
    CHECK(evaluate_hamiltonian(lc, q0) == doctest::Approx(9 * e2 * e2 / (2 * C)).epsilon(1e-14));

    auto tm = build_hamiltonian(build_topology(fixtures::transmon()).topology);
    PhasePoint a;
    a.n_j = Vec::Constant(1, 1.0);
    a.phi_j = Vec::Constant(1, 0.3);
    PhasePoint b = a;
    b.phi_j(0) += kTwoPi;
    CHECK(evaluate_hamiltonian(tm, a) == doctest::Approx(evaluate_hamiltonian(tm, b)).epsilon(1e-13));

    PhasePoint bad = a;
    bad.n_j(0) = 0.5;
    CHECK_THROWS_AS(evaluate_hamiltonian(tm, bad), std::invalid_argument);
    PhasePoint missing;
    CHECK_THROWS_AS(evaluate_hamiltonian(tm, missing), std::invalid_argument);
}

TEST_CASE("structural: variable inventory and compact variables") {
    for (const auto& net : {fixtures::gmon(), fixtures::mixed(), fixtures::fluxonium(), fixtures::dc_squid()}) {
        auto h = build_hamiltonian(build_topology(net).topology);
        std::size_t k = h.modes.k(), j = h.modes.j(), s = h.modes.s();
        CHECK(h.variables().size() == 2 * (k + j + s));
        CHECK(static_cast<std::size_t>(h.capacitive.inverse.rows()) == k + j);
        CHECK(static_cast<std::size_t>(h.inductive.inverse.rows()) == k + s);
        CHECK(cholesky_pd_check(h.capacitive.inverse));
        if (k + s > 0) CHECK(cholesky_pd_check(h.inductive.inverse));
        for (const auto& term : h.junctions) {
            CHECK(term.coeff_ext.size() == k);
            CHECK(term.coeff_compact.size() == j);
        }
        for (const auto& term : h.slips) {
            CHECK(term.coeff_ext.size() == k);
            CHECK(term.coeff_compact.size() == s);
        }
    }
    auto h = build_hamiltonian(build_topology(fixtures::gmon()).topology);
    CHECK(h.modes.k() == 2);
    CHECK(h.modes.j() == 2);
    CHECK(h.modes.s() == 0);
}

TEST_CASE("property: integer offsets do not change the Hamiltonian") {
    std::mt19937_64 rng(5150);
    std::uniform_int_distribution<int> d(-4, 4);
    std::normal_distribution<double> g;
    for (const auto& net : {fixtures::gmon(), fixtures::mixed(), fixtures::fluxonium()}) {
        auto base = build_topology(net).topology;
        for (Eigen::Index i = 0; i < base.Q_ext.size(); ++i) base.Q_ext(i) = 0.3 * e2 * g(rng);
        for (Eigen::Index i = 0; i < base.Phi_ext.size(); ++i) base.Phi_ext(i) = 0.3 * phi0 * g(rng);
        base.N_0 = Vec::Constant(base.n(), 0.25);
        base.M_0 = Vec::Constant(base.l(), -0.4);
        auto shifted = base;
        for (Eigen::Index i = 0; i < shifted.N_0.size(); ++i) shifted.N_0(i) += d(rng);
        for (Eigen::Index i = 0; i < shifted.M_0.size(); ++i) shifted.M_0(i) += d(rng);
        auto h0 = build_hamiltonian(base);
        auto h1 = build_hamiltonian(shifted);
        REQUIRE(h0.removal.empty());
        for (int trial = 0; trial < 50; ++trial) {
            PhasePoint p = random_point(rng, h0);
            CHECK(rel(evaluate_hamiltonian(h0, p), evaluate_hamiltonian(h1, p)) <= 1e-12);
        }
    }
}

TEST_CASE("property: basis independence of the quantized model") {
    std::mt19937_64 rng(31337);
    std::normal_distribution<double> g;
    std::uniform_int_distribution<int> d(-3, 3);
    for (const auto& net : {fixtures::gmon(), fixtures::mixed(), fixtures::fluxonium(), fixtures::dc_squid(),
                            fixtures::rf_squid(), fixtures::transmon()}) {
        auto orig = build_topology(net).topology;
        for (Eigen::Index i = 0; i < orig.Q_ext.size(); ++i) orig.Q_ext(i) = 0.3 * e2 * g(rng);
        for (Eigen::Index i = 0; i < orig.Phi_ext.size(); ++i) orig.Phi_ext(i) = 0.3 * phi0 * g(rng);
        for (int trial = 0; trial < 10; ++trial) {
            auto U = fixtures::random_unimodular(rng, orig.n());
            auto W = fixtures::random_unimodular(rng, orig.l());
            auto topo = apply_basis_change(orig, U, W);
            auto h = build_hamiltonian(topo);
            REQUIRE(h.removal.empty());
            auto Ut = U.then(h.U_reduce);
            auto Wt = W.then(h.W_reduce);
            const auto k = static_cast<Eigen::Index>(h.modes.k());
            const auto n = static_cast<Eigen::Index>(orig.n()), l = static_cast<Eigen::Index>(orig.l());
            for (int pt = 0; pt < 5; ++pt) {
                PhasePoint p = random_point(rng, h);
                Vec Phi_r(n), Pi_r(n), Q_r(l), P_r(l);
                for (Eigen::Index i = 0; i < k; ++i) {
                    double Pi_k = e2 * d(rng);
                    Phi_r(i) = phi0 * d(rng) - p.P_k(i);
                    Pi_r(i) = Pi_k;
                    Q_r(i) = p.Q_k(i) - Pi_k;
                    P_r(i) = p.P_k(i);
                }
                for (Eigen::Index i = k; i < n; ++i) {
                    Phi_r(i) = p.phi_j(i - k) * phi0 / kTwoPi;
                    Pi_r(i) = e2 * p.n_j(i - k);
                }
                for (Eigen::Index i = k; i < l; ++i) {
                    Q_r(i) = p.q_s(i - k) * e2 / kTwoPi;
                    P_r(i) = phi0 * p.m_s(i - k);
                }
                Vec Phi = to_real(Ut.M).transpose() * Phi_r;
                Vec Pi = to_real(Ut.M_inv) * Pi_r;
                Vec Q = to_real(Wt.M).transpose() * Q_r;
                Vec P = to_real(Wt.M_inv) * P_r;
                CHECK(rel(evaluate_hamiltonian(h, p), original_hamiltonian(orig, Phi, Pi, Q, P)) <= 1e-10);
            }
        }
    }
}

TEST_CASE("apply_zero_limits") {
    SUBCASE("no zero elements is the identity") {
        auto t = build_topology(fixtures::gmon()).topology;
        auto [r, rec] = apply_zero_limits(t, {}, {});
        CHECK(rec.identity());
        CHECK(r.Omega == t.Omega);
        CHECK(r.C == t.C);
    }
    SUBCASE("dc SQUID with vanishing loop inductance") {
        const double phix = 0.37 * phi0;
        auto t = build_topology(fixtures::dc_squid(100e-12, phix)).topology;
        REQUIRE(t.Phi_ext(0) == doctest::Approx(phix));
        auto [r, rec] = apply_zero_limits(t, {}, {0});
        CHECK(r.n() == 1);
        CHECK(r.l() == 0);
        CHECK(rec.constrained_nodes.size() == 1);
        REQUIRE(r.J() == 2);
        // both junctions act on the single remaining node; the flux enters only the cosine phases
        CHECK(std::abs(r.A_J(0, 0)) == 1);
        CHECK(std::abs(r.A_J(0, 1)) == 1);
        double diff = r.A_J(0, 0) * r.phi_J_offset(0) - r.A_J(0, 1) * r.phi_J_offset(1);
        CHECK(std::abs(std::abs(diff) - phix) <= 1e-12 * phix);
        auto h = build_hamiltonian(r);
        CHECK(h.modes.j() == 1);
        CHECK(h.modes.k() == 0);
    }
    SUBCASE("scalar gauge coefficient on the capacitive side") {
        const double c11 = 4e-14, c14 = -1e-14, c44 = 3e-14, phix = 0.21 * phi0;
        Mat C(2, 2);
        C << c11, c14, c14, c44;
        auto t = make_topology(C, Mat::Constant(1, 1, 1e-10), IntMatrix{{1}, {0}}, IntMatrix(1, 0), IntMatrix{{0}, {1}});
        t.Phi_ext << phix;
        auto [r, rec] = apply_zero_limits(t, {}, {0});
        CHECK(rec.Gamma(0, 0) == doctest::Approx(c14 / c11).epsilon(1e-14));
        CHECK(r.phi_J_offset(0) == doctest::Approx(c14 / c11 * phix).epsilon(1e-14));
        CHECK(rec.Phi_constrained(0) == doctest::Approx(-phix));
        CHECK(r.C(0, 0) == c11);
    }
    SUBCASE("scalar gauge coefficient on the inductive side") {
        const double l22 = 2e-9, l23 = 0.5e-9, l33 = 3e-9, qx = 0.3 * e2;
        Mat L(2, 2);
        L << l22, l23, l23, l33;
        auto t = make_topology(Mat::Constant(1, 1, 1e-14), L, IntMatrix(1, 0), IntMatrix{{1}, {0}}, IntMatrix{{0, 1}});
        t.Q_ext << qx;
        auto [r, rec] = apply_zero_limits(t, {0}, {});
        CHECK(r.n() == 0);
        CHECK(r.l() == 1);
        CHECK(rec.Lambda(0, 0) == doctest::Approx(l23 / l22).epsilon(1e-14));
        CHECK(r.q_S_offset(0) == doctest::Approx(-l23 / l22 * qx).epsilon(1e-14));
        CHECK(rec.Q_constrained(0) == doctest::Approx(qx));
    }
    SUBCASE("forbidden limits") {
        auto t = build_topology(fixtures::fluxonium()).topology;
        CHECK_THROWS_AS(apply_zero_limits(t, {0}, {}), DomainViolation);
        CHECK_THROWS_AS(apply_zero_limits(t, {}, {0}), DomainViolation);
    }
}
