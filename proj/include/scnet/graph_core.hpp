#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scnet/intlin.hpp"
#include "scnet/numeric.hpp"

namespace scnet {

// ============================================================================
// Branch netlists
// ============================================================================

enum class BranchKind { Capacitor, Inductor, Josephson, PhaseSlip, Mutual };

const char* to_string(BranchKind k);
BranchKind branch_kind_from_string(const std::string& s);

struct Branch {
    BranchKind kind = BranchKind::Capacitor;
    std::string label;
    int from = 0;
    int to = 0;
    /// capacitance [F] for capacitors and junctions, inductance [H] for inductors,
    /// phase slips and mutual couplings
    double value = 0.0;
    double energy = 0.0;  ///< E_J or E_S [J]
    int a = -1;           ///< mutual: first inductive branch (netlist index)
    int b = -1;           ///< mutual: second inductive branch (netlist index)
    double phi_ext = 0.0; ///< external flux attributed to an inductive branch [Wb]
    double m0 = 0.0;      ///< trapped fluxons attributed to an inductive branch
};

struct TimeSeries {
    std::vector<double> times;
    Mat values;  ///< one row per sample, one column per node (or loop)
    bool empty() const { return times.empty(); }
};

/// Linear interpolation of a sampled series, clamped at the ends; zero vector of `dim` if empty.
Vec interpolate(const TimeSeries& ts, double t, Eigen::Index dim);
/// Piecewise-constant slope of the interpolant, zero outside the sampled range.
Vec interpolate_derivative(const TimeSeries& ts, double t, Eigen::Index dim);

struct BranchNetlist {
    std::vector<std::string> nodes;  ///< node 0 is ground
    std::vector<Branch> branches;
    std::vector<double> q_ext;       ///< per netlist node [C]; may be empty
    std::vector<double> n0;          ///< per netlist node; may be empty
    struct Drive {
        bool on_node = true;  ///< node charge drive, else inductive-branch flux drive
        int index = 0;
        std::vector<double> times;
        std::vector<double> values;
    };
    std::vector<Drive> drives;
};

bool is_inductive(BranchKind k);
bool is_capacitive(BranchKind k);

// ============================================================================
// Node-loop topology
// ============================================================================

struct CapEdge {
    int row_from = -1;  ///< capacitive row index, -1 for ground
    int row_to = -1;
    bool junction = false;
    std::string label;
};

struct CircuitTopology {
    Mat C;
    Mat L;
    IntMatrix A_J;
    IntMatrix B_S;
    IntMatrix Omega;
    Vec Q_ext;
    Vec Phi_ext;
    Vec N_0;
    Vec M_0;
    Vec E_J;
    Vec E_S;
    Vec phi_J_offset;  ///< constant flux inside each junction cosine [Wb]
    Vec q_S_offset;    ///< constant charge inside each phase-slip cosine [C]
    TimeSeries q_drive;    ///< added to Q_ext, columns = nodes
    TimeSeries phi_drive;  ///< added to Phi_ext, columns = loops
    std::vector<std::string> node_labels;
    std::vector<std::string> loop_labels;
    std::vector<std::string> junction_labels;
    std::vector<std::string> slip_labels;
    std::vector<CapEdge> cap_edges;  ///< netlist capacitive branches, junctions first

    std::size_t n() const { return static_cast<std::size_t>(C.rows()); }
    std::size_t l() const { return static_cast<std::size_t>(L.rows()); }
    std::size_t J() const { return A_J.cols(); }
    std::size_t S() const { return B_S.cols(); }

    /// Fills zero vectors/empty matrices so every field matches (n, l, J, S).
    void normalize();
    void check_dimensions() const;
};

CircuitTopology make_topology(const Mat& C, const Mat& L, const IntMatrix& A_J, const IntMatrix& B_S,
                              const IntMatrix& Omega);

struct LoopBasis {
    IntMatrix B_L;                     ///< loops x inductive branches
    std::vector<int> inductive_branches;  ///< netlist branch index per column
    std::vector<int> defining_branch;     ///< netlist branch index per loop
    std::vector<int> capacitive_nodes;    ///< netlist node index per capacitive row
    IntMatrix A_C;                     ///< capacitive rows x capacitive branches
    std::vector<int> capacitive_branches;
};

struct BuildResult {
    CircuitTopology topology;
    LoopBasis loops;
};

BuildResult build_topology(const BranchNetlist& netlist);

struct Violation {
    std::string kind;
    std::string message;
};

struct Diagnostics {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    bool has(const std::string& kind) const;
};

Diagnostics validate(const CircuitTopology& topo);

struct TreeCotree {
    IntMatrix A_CT;  ///< n x n, columns: J junction edges then C' capacitor edges
    IntMatrix B_LT;  ///< l x l, columns: S phase-slip edges then L' inductor edges
    std::size_t J = 0;
    std::size_t S = 0;
    std::vector<std::string> tree_labels;
    std::vector<std::string> cotree_labels;
};

TreeCotree find_tree_cotree(const CircuitTopology& topo);

/// C -> U C U^T, L -> W L W^T, A_J -> U A_J, B_S -> W B_S, Omega -> U Omega W^T, and offsets.
CircuitTopology apply_basis_change(const CircuitTopology& topo, const UnimodularTransform& U,
                                   const UnimodularTransform& W);

Mat to_real(const IntMatrix& m);

}  // namespace scnet
