#pragma once

#include <cstdlib>
#include <random>
#include <string>

#include "scnet/constants.hpp"
#include "scnet/graph_core.hpp"

namespace fixtures {

using scnet::Branch;
using scnet::BranchKind;
using scnet::BranchNetlist;

inline Branch cap(int from, int to, double c, std::string label = {}) {
    return {BranchKind::Capacitor, std::move(label), from, to, c};
}
inline Branch ind(int from, int to, double l, std::string label = {}, double phi_ext = 0.0) {
    Branch b{BranchKind::Inductor, std::move(label), from, to, l};
    b.phi_ext = phi_ext;
    return b;
}
inline Branch jj(int from, int to, double cj, double ej, std::string label = {}) {
    return {BranchKind::Josephson, std::move(label), from, to, cj, ej};
}
inline Branch qps(int from, int to, double ls, double es, std::string label = {}, double phi_ext = 0.0) {
    Branch b{BranchKind::PhaseSlip, std::move(label), from, to, ls, es};
    b.phi_ext = phi_ext;
    return b;
}
inline Branch mutual(int a, int b, double m) {
    Branch br{BranchKind::Mutual, "M", 0, 0, m};
    br.a = a;
    br.b = b;
    return br;
}

inline BranchNetlist nodes(int count) {
    BranchNetlist n;
    n.nodes.push_back("gnd");
    for (int i = 1; i < count; ++i) n.nodes.push_back("n" + std::to_string(i));
    return n;
}

/// E_J for a junction at the given frequency [Hz].
inline double energy_hz(double f) { return scnet::kPlanck * f; }

inline BranchNetlist lc(double c = 1e-12, double l = 1e-9) {
    BranchNetlist n = nodes(2);
    n.branches = {cap(1, 0, c, "C"), ind(1, 0, l, "L")};
    return n;
}

inline BranchNetlist transmon(double cj = 5e-15, double c = 60e-15, double ej = energy_hz(15e9)) {
    BranchNetlist n = nodes(2);
    n.branches = {jj(1, 0, cj, ej, "J"), cap(1, 0, c, "Cs")};
    return n;
}

/// Junction in parallel with a phase-slip wire: A_J = B_S = Omega = [1].
inline BranchNetlist fluxonium(double c = 5e-15, double l = 300e-9, double ej = energy_hz(4e9),
                               double es = energy_hz(1e9)) {
    BranchNetlist n = nodes(2);
    n.branches = {jj(1, 0, c, ej, "J"), qps(1, 0, l, es, "S")};
    return n;
}

/// Junction shunted by a linear inductor.
inline BranchNetlist rf_squid(double c = 10e-15, double l = 1e-9, double ej = energy_hz(10e9),
                              double phi_ext = 0.0) {
    BranchNetlist n = nodes(2);
    n.branches = {jj(1, 0, c, ej, "J"), ind(1, 0, l, "L", phi_ext)};
    return n;
}

/// Two grounded junctions closed into a loop by an inductor between their islands.
inline BranchNetlist dc_squid(double l = 100e-12, double phi_ext = 0.0) {
    BranchNetlist n = nodes(3);
    n.branches = {jj(1, 0, 8e-15, energy_hz(12e9), "J1"), jj(2, 0, 9e-15, energy_hz(14e9), "J2"),
                  ind(1, 2, l, "L", phi_ext), cap(1, 2, 2e-15, "Cc")};
    return n;
}

/// Coupler example with three junctions and two grounded inductors.
inline BranchNetlist gmon() {
    BranchNetlist n = nodes(5);
    n.branches = {jj(1, 2, 4e-15, energy_hz(20e9), "J1"), jj(4, 3, 4.5e-15, energy_hz(22e9), "J2"),
                  jj(2, 3, 5e-15, energy_hz(18e9), "J3"),  cap(4, 0, 80e-15, "C1"),
                  cap(1, 0, 70e-15, "C2"),                 cap(3, 0, 15e-15, "C3"),
                  ind(2, 0, 0.6e-9, "L1"),                 ind(3, 0, 0.7e-9, "L2")};
    return n;
}

/// Two islands, three inductive loops and a mutual inductance between L1 and L2.
struct TwoNodeThreeLoop {
    double C1 = 30e-15, C2 = 40e-15, C3 = 5e-15, L1 = 2e-9, L2 = 3e-9, L3 = 1.5e-9, m = 0.4e-9;
    BranchNetlist netlist() const {
        BranchNetlist n = nodes(3);
        n.branches = {cap(1, 0, C1, "C1"), cap(2, 0, C2, "C2"), cap(1, 2, C3, "C3"),
                      ind(1, 0, L1, "L1"), ind(2, 0, L2, "L2"), ind(1, 2, L3, "L3"),
                      mutual(3, 4, m)};
        return n;
    }
};

inline BranchNetlist junction_loop() {
    BranchNetlist n = nodes(2);
    n.branches = {jj(1, 0, 5e-15, energy_hz(10e9), "J1"), jj(1, 0, 5e-15, energy_hz(11e9), "J2")};
    return n;
}

/// Junction and phase slip in a two-loop circuit with a free capacitive island.
inline BranchNetlist mixed() {
    BranchNetlist n = nodes(4);
    n.branches = {jj(1, 0, 6e-15, energy_hz(8e9), "J"),   cap(1, 2, 20e-15, "Cc"), cap(2, 0, 50e-15, "C2"),
                  cap(3, 0, 30e-15, "C3"),                qps(1, 3, 50e-9, energy_hz(2e9), "S"),
                  ind(3, 0, 20e-9, "L1"),                 ind(2, 3, 10e-9, "L2")};
    return n;
}

/// Transmon whose island is tied to a grounded LC resonator through an inductor and a capacitor.
inline BranchNetlist inductive_coupler() {
    BranchNetlist n = nodes(3);
    n.branches = {jj(1, 0, 7e-15, energy_hz(12e9), "J"), cap(2, 0, 60e-15, "Cr"), ind(1, 2, 4e-9, "Lc"),
                  cap(1, 2, 3e-15, "Cc"), ind(2, 0, 2e-9, "Lr")};
    return n;
}

inline std::string data_path(const std::string& file) {
    const char* dir = std::getenv("SCNET_FIXTURES");
    return std::string(dir ? dir : "tests/data") + "/" + file;
}

inline scnet::Mat random_pd(std::mt19937_64& rng, int n, double scale = 1.0) {
    std::normal_distribution<double> g;
    scnet::Mat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = g(rng);
    return scale * (a * a.transpose() + 0.5 * scnet::Mat::Identity(n, n));
}

inline scnet::UnimodularTransform random_unimodular(std::mt19937_64& rng, std::size_t n, int ops = 8) {
    scnet::IntMatrix u = scnet::IntMatrix::identity(n);
    for (int k = 0; k < ops && n > 1; ++k) {
        std::size_t i = rng() % n, j = rng() % n;
        if (i != j) u.add_row_multiple(i, j, static_cast<std::int64_t>(rng() % 3) - 1);
        if (rng() % 4 == 0) u.negate_row(i);
        if (rng() % 5 == 0) u.swap_rows(i, j);
    }
    return scnet::UnimodularTransform::from_matrix(u);
}

}  // namespace fixtures
