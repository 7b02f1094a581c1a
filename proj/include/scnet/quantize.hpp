#pragma once

#include <string>
#include <vector>

#include "scnet/graph_core.hpp"

namespace scnet {

struct ModePartition {
    std::vector<std::size_t> k_indices;  ///< extended (Q_k, P_k) pairs
    std::vector<std::size_t> j_indices;  ///< discrete charge / compact flux
    std::vector<std::size_t> s_indices;  ///< discrete flux / compact charge
    std::size_t removed_doubly_discrete = 0;

    std::size_t k() const { return k_indices.size(); }
    std::size_t j() const { return j_indices.size(); }
    std::size_t s() const { return s_indices.size(); }
};

/// Record of the free capacitive rows and inductive columns that were eliminated.
struct FreeModeRemoval {
    UnimodularTransform U;  ///< node basis exposing the free rows
    UnimodularTransform W;  ///< loop basis exposing the free columns
    std::vector<std::size_t> alpha;  ///< free node rows (in the U basis)
    std::vector<std::size_t> beta;   ///< free loop columns (in the W basis)
    std::vector<std::size_t> kept_nodes;
    std::vector<std::size_t> kept_loops;

    bool empty() const { return alpha.empty() && beta.empty(); }
};

std::pair<CircuitTopology, FreeModeRemoval> remove_free_modes(const CircuitTopology& topo);

struct Reduction {
    CircuitTopology topology;  ///< Omega = [[I_k, 0], [0, 0]]
    ModePartition modes;
    UnimodularTransform U;
    UnimodularTransform W;
};

Reduction classify_and_reduce(const CircuitTopology& topo);

/// ½ (x - offset)^T inverse (x - offset) over the listed variables.
struct QuadraticForm {
    Mat inverse;
    Vec offset;
    TimeSeries drive;  ///< added to offset at evaluation time
    std::vector<std::string> variables;
};

/// -energy * cos((2π/unit) coeff_ext·x_ext + coeff_compact·θ + phase)
struct CosineTerm {
    std::string label;
    double energy = 0.0;
    std::vector<std::int64_t> coeff_ext;
    std::vector<std::int64_t> coeff_compact;
    double phase = 0.0;  ///< radians
};

struct HamiltonianModel {
    ModePartition modes;
    QuadraticForm capacitive;  ///< variables (Q_k, 2e n_j)
    QuadraticForm inductive;   ///< variables (P_k, Φ0 m_s), or (Φ_k, Φ0 m_s) in standard notation
    std::vector<CosineTerm> junctions;  ///< ext coefficients act on P_k (or Φ_k)
    std::vector<CosineTerm> slips;      ///< ext coefficients act on Q_k
    bool standard_notation = false;
    FreeModeRemoval removal;
    UnimodularTransform U_reduce;
    UnimodularTransform W_reduce;
    std::vector<std::string> node_labels;
    std::vector<std::string> loop_labels;

    /// Variable names of the model, e.g. Q_1, P_1, n_2, phi_2, m_1, q_1.
    std::vector<std::string> variables() const;
};

struct HamiltonianOptions {
    bool standard_notation = false;
};

HamiltonianModel build_hamiltonian(const CircuitTopology& topo, const HamiltonianOptions& opts = {});

/// Standard-notation relabelling Φ_k = -P_k.
HamiltonianModel to_standard_notation(const HamiltonianModel& model);

struct PhasePoint {
    Vec Q_k;
    Vec P_k;  ///< holds Φ_k for a model in standard notation
    Vec n_j;
    Vec phi_j;
    Vec m_s;
    Vec q_s;
    double t = 0.0;
};

double evaluate_hamiltonian(const HamiltonianModel& model, const PhasePoint& point);

struct ZeroLimitRecord {
    UnimodularTransform U;
    UnimodularTransform W;
    std::vector<std::size_t> retained_nodes;     ///< sector 1
    std::vector<std::size_t> constrained_nodes;  ///< sector 4: Φ_4 = -Φ_ext4
    std::vector<std::size_t> zero_cap_paired;    ///< sector 3 rows (zero-capacitance)
    std::vector<std::size_t> retained_loops;     ///< sector 2
    std::vector<std::size_t> constrained_loops;  ///< sector 3: Q_3 = Q_ext3
    std::vector<std::size_t> zero_ind_paired;    ///< sector 4 columns (zero-inductance)
    std::vector<std::size_t> dropped_nodes;      ///< sector 5 rows
    std::vector<std::size_t> dropped_loops;      ///< sector 5 columns
    Mat Gamma;
    Mat Lambda;
    Vec Phi_constrained;
    Vec Q_constrained;

    bool identity() const { return dropped_nodes.empty() && dropped_loops.empty() && zero_cap_paired.empty() &&
                                   zero_ind_paired.empty(); }
};

std::pair<CircuitTopology, ZeroLimitRecord> apply_zero_limits(const CircuitTopology& topo,
                                                              const std::vector<std::size_t>& zero_cap_nodes,
                                                              const std::vector<std::size_t>& zero_ind_loops);

}  // namespace scnet
