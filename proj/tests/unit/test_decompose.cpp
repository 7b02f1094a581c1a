#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "scnet/decompose.hpp"
#include "scnet/errors.hpp"

using namespace scnet;

namespace {

EdgeSystem edge_system(const BranchNetlist& net) {
    auto t = build_topology(net).topology;
    return to_edge_basis(t, find_tree_cotree(t));
}

bool upper_identity(const IntMatrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (m(i, j) != (i == j ? 1 : 0)) return false;
    return true;
}

/// All J x f matrices over {-1, 0, 1} that are totally unimodular with full column rank.
std::vector<IntMatrix> junction_only_forms(std::size_t J) {
    std::vector<IntMatrix> out;
    out.emplace_back(J, 0);
    for (std::size_t f = 1; f <= J; ++f) {
        std::size_t cells = J * f, total = 1;
        for (std::size_t c = 0; c < cells; ++c) total *= 3;
        for (std::size_t code = 0; code < total; ++code) {
            IntMatrix m(J, f);
            std::size_t x = code;
            for (std::size_t c = 0; c < cells; ++c, x /= 3) m(c / f, c % f) = static_cast<std::int64_t>(x % 3) - 1;
            if (integer_rank(m) == f && check_tu_exhaustive(m)) out.push_back(m);
        }
    }
    return out;
}

FundamentalForm junction_only(const IntMatrix& Jf) {
    FundamentalForm ff;
    ff.J = Jf.rows();
    ff.f = Jf.cols();
    ff.Omega_JS = IntMatrix(ff.J, 0);
    ff.Omega_Jf = Jf;
    ff.Omega_pS = IntMatrix(0, 0);
    return ff;
}

std::size_t count_classes(std::size_t J) {
    std::vector<ClassSignature> classes;
    for (const IntMatrix& m : junction_only_forms(J)) {
        ClassSignature s = canonical_signature(junction_only(m));
        if (std::find(classes.begin(), classes.end(), s) == classes.end()) classes.push_back(s);
    }
    return classes.size();
}

}  // namespace

TEST_CASE("edge basis") {
    SUBCASE("gmon") {
        EdgeSystem es = edge_system(fixtures::gmon());
        CHECK(es.omega() == IntMatrix{{0, 0}, {-1, -1}, {1, 0}, {1, 1}});
        CHECK(upper_identity(es.topology.A_J));
        CHECK(es.J() == 3);
        CHECK(es.row_kinds.back() == EdgeKind::Capacitor);
    }
    SUBCASE("fluxonium exposes both the junction and the slip") {
        EdgeSystem es = edge_system(fixtures::fluxonium());
        CHECK(es.omega() == IntMatrix{{1}});
        CHECK(upper_identity(es.topology.B_S));
    }
    SUBCASE("capacitance transforms congruently") {
        auto t = build_topology(fixtures::mixed()).topology;
        auto tc = find_tree_cotree(t);
        EdgeSystem es = to_edge_basis(t, tc);
        Mat A = to_real(tc.A_CT);
        CHECK((A * es.topology.C * A.transpose() - t.C).norm() <= 1e-12 * t.C.norm());
    }
}

TEST_CASE("fundamental decomposition") {
    SUBCASE("gmon replay") {
        auto [es, ff] = fundamental_decomposition(edge_system(fixtures::gmon()));
        std::vector<IntMatrix> seq;
        for (const Step& s : es.steps) seq.push_back(s.omega_after);
        REQUIRE(seq.size() == 3);
        CHECK(seq[0] == IntMatrix{{0, 0}, {-1, 0}, {1, -1}, {1, 0}});
        CHECK(seq[1] == IntMatrix{{0, 0}, {0, 0}, {0, -1}, {1, 0}});
        CHECK(seq[2] == IntMatrix{{0, 0}, {0, 0}, {0, 1}, {1, 0}});
        CHECK(es.steps[0].op.kind == StepKind::ColPivot);
        CHECK(es.steps[1].op.kind == StepKind::RowPivot);
        CHECK(es.steps[2].op.kind == StepKind::ColSign);
        CHECK(ff.J == 3);
        CHECK(ff.f == 1);
        CHECK(ff.r == 1);
        CHECK(ff.p == 0);
        CHECK(ff.Omega_Jf == IntMatrix{{0}, {0}, {1}});
        CHECK(ff.assemble() == IntMatrix{{0, 0}, {0, 0}, {1, 0}, {0, 1}});
    }
    SUBCASE("LC is a single harmonic pair") {
        auto [es, ff] = fundamental_decomposition(edge_system(fixtures::lc()));
        CHECK(ff.r == 1);
        CHECK(ff.J == 0);
        CHECK(es.omega() == IntMatrix{{1}});
    }
    SUBCASE("inductive coupler leaves the junction coupled through one inductor") {
        auto [es, ff] = fundamental_decomposition(edge_system(fixtures::inductive_coupler()));
        CHECK(ff.J == 1);
        CHECK(ff.r == 1);
        CHECK(ff.f == 1);
        CHECK(ff.Omega_Jf == IntMatrix{{1}});
    }
    SUBCASE("free loop is removed") {
        auto [es, ff] = fundamental_decomposition(edge_system(fixtures::TwoNodeThreeLoop{}.netlist()));
        CHECK(ff.r == 2);
        CHECK(ff.beta == 1);
        CHECK(ff.free_modes_removed);
        CHECK(es.topology.l() == 2);
        CHECK(es.steps.back().op.kind != StepKind::RowPivot);
    }
    SUBCASE("mixed circuit keeps A_J and B_S") {
        auto [es, ff] = fundamental_decomposition(edge_system(fixtures::mixed()));
        CHECK(upper_identity(es.topology.A_J));
        CHECK(upper_identity(es.topology.B_S));
        CHECK(ff.J == 1);
        CHECK(ff.S == 1);
        CHECK(check_tu(es.omega()));
    }
    SUBCASE("idempotent") {
        for (const auto& net : {fixtures::gmon(), fixtures::mixed(), fixtures::inductive_coupler(),
                                fixtures::dc_squid(), fixtures::TwoNodeThreeLoop{}.netlist()}) {
            auto [es, ff] = fundamental_decomposition(edge_system(net));
            EdgeSystem again = es;
            again.steps.clear();
            auto [es2, ff2] = fundamental_decomposition(again);
            CHECK(es2.steps.empty());
            CHECK(es2.omega() == es.omega());
            CHECK(ff2.assemble() == ff.assemble());
        }
    }
    SUBCASE("transforms track the recorded steps") {
        auto t = build_topology(fixtures::gmon()).topology;
        auto [es, ff] = fundamental_decomposition(to_edge_basis(t, find_tree_cotree(t)));
        CHECK(es.U_total.M * t.Omega * es.W_total.M.transpose() == es.omega());
        Mat U = to_real(es.U_total.M);
        CHECK((U * t.C * U.transpose() - es.topology.C).norm() <= 1e-12 * t.C.norm());
        CHECK(es.U_total.M * t.A_J == es.topology.A_J);
    }
}

TEST_CASE("structure-preserving step legality") {
    EdgeSystem es = edge_system(fixtures::gmon());
    CHECK_THROWS_AS(structure_preserving_step(es, {StepKind::RowPivot, 1, 0}), DomainViolation);
    CHECK_THROWS_AS(structure_preserving_step(es, {StepKind::RowSwap, 0, 3}), DomainViolation);
    CHECK_THROWS_AS(structure_preserving_step(es, {StepKind::RowAdd, 3, 0, 1}), DomainViolation);
    CHECK_THROWS_AS(structure_preserving_step(es, {StepKind::RowPivot, 0, 0}), DomainViolation);
    CHECK_NOTHROW(structure_preserving_step(es, {StepKind::RowPivot, 3, 0}));
    CHECK_NOTHROW(structure_preserving_step(es, {StepKind::RowAdd, 0, 3, -1}));

    SUBCASE("junction sign flip keeps A_J and the cosine argument") {
        EdgeSystem f = structure_preserving_step(es, {StepKind::RowSign, 1, 0});
        CHECK(upper_identity(f.topology.A_J));
        CHECK(f.omega()(1, 0) == 1);
    }
    SUBCASE("junction swap relabels the junctions") {
        EdgeSystem f = structure_preserving_step(es, {StepKind::RowSwap, 0, 2});
        CHECK(upper_identity(f.topology.A_J));
        CHECK(f.topology.junction_labels[0] == es.topology.junction_labels[2]);
        CHECK(f.topology.E_J(0) == es.topology.E_J(2));
    }
}

TEST_CASE("random legal steps preserve structure") {
    std::mt19937_64 rng(11);
    for (const auto& net : {fixtures::gmon(), fixtures::mixed(), fixtures::inductive_coupler()}) {
        EdgeSystem es = edge_system(net);
        const std::size_t n = es.topology.n(), l = es.topology.l();
        int applied = 0;
        for (int trial = 0; trial < 400; ++trial) {
            StepOp op;
            op.kind = static_cast<StepKind>(rng() % 6);
            op.i = rng() % (op.kind == StepKind::ColSwap ? l : n);
            op.j = rng() % (op.kind == StepKind::RowSwap ? n : l);
            if (op.kind == StepKind::ColSign) op.j = rng() % l;
            try {
                es = structure_preserving_step(es, op);
                ++applied;
            } catch (const DomainViolation&) {
                continue;
            }
            REQUIRE(upper_identity(es.topology.A_J));
            REQUIRE(upper_identity(es.topology.B_S));
            REQUIRE(es.omega().entries_in_unit_range());
            REQUIRE(Eigen::LLT<Mat>(es.topology.C).info() == Eigen::Success);
        }
        CHECK(applied > 50);
        CHECK(check_tu(es.omega()));
    }
}

TEST_CASE("classification") {
    SUBCASE("junction-only class counts") {
        CHECK(count_classes(1) == 2);
        CHECK(count_classes(2) == 4);
    }
    SUBCASE("representatives") {
        CHECK(canonical_signature(junction_only(IntMatrix{{-1}})).Omega_Jf == IntMatrix{{1}});
        CHECK(canonical_signature(junction_only(IntMatrix{{1}, {1}})).Omega_Jf == IntMatrix{{1}, {-1}});
        CHECK(canonical_signature(junction_only(IntMatrix{{0}, {-1}})).Omega_Jf == IntMatrix{{1}, {0}});
        CHECK(canonical_signature(junction_only(IntMatrix{{1, 1}, {0, 1}})).Omega_Jf == IntMatrix{{1, 0}, {0, 1}});
    }
    SUBCASE("gmon is a single junction loop with two spectators") {
        auto [es, ff] = fundamental_decomposition(edge_system(fixtures::gmon()));
        ClassSignature s = canonical_signature(ff);
        CHECK(s.Omega_Jf == IntMatrix{{1}, {0}, {0}});
        CHECK(s.r == 1);
    }
    SUBCASE("fluxonium") {
        auto [es, ff] = fundamental_decomposition(edge_system(fixtures::fluxonium()));
        ClassSignature s = canonical_signature(ff);
        CHECK(s.Omega_JS == IntMatrix{{1}});
        CHECK(!s.junction_only());
    }
    SUBCASE("oversized forms are rejected") {
        CHECK_THROWS_AS(canonical_signature(junction_only(IntMatrix(4, 0))), UnsupportedSize);
    }
}

TEST_CASE("node basis") {
    auto t = build_topology(fixtures::gmon()).topology;
    auto tc = find_tree_cotree(t);
    EdgeSystem es = to_edge_basis(t, tc);
    SUBCASE("round trip through the tree incidence") {
        CircuitTopology back = to_node_basis(es, tc.A_CT, tc.B_LT);
        CHECK(back.Omega == t.Omega);
        CHECK((back.C - t.C).norm() <= 1e-12 * t.C.norm());
        CHECK(back.A_J == t.A_J);
    }
    SUBCASE("identity incidence gives the edge form") {
        auto [dec, ff] = fundamental_decomposition(es);
        CircuitTopology node = to_node_basis(dec, IntMatrix::identity(4));
        CHECK(node.Omega == IntMatrix{{0, 0}, {0, 0}, {0, 1}, {1, 0}});
    }
    SUBCASE("non-incidence matrices are rejected") {
        IntMatrix bad = IntMatrix::identity(4);
        bad(1, 0) = 1;
        CHECK_THROWS_AS(to_node_basis(es, bad), DomainViolation);
        CHECK_THROWS_AS(to_node_basis(es, IntMatrix::identity(3)), std::invalid_argument);
    }
}
