#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scnet/graph_core.hpp"
#include "scnet/quantize.hpp"

namespace scnet {

enum class EdgeKind { Junction, Capacitor, PhaseSlip, Inductor };

const char* to_string(EdgeKind k);

enum class StepKind { RowPivot, ColPivot, RowSign, ColSign, RowSwap, ColSwap, RowAdd, ColAdd, FreeModes };

const char* to_string(StepKind k);

struct StepOp {
    StepKind kind = StepKind::RowPivot;
    std::size_t i = 0;  ///< row (or first index of a swap)
    std::size_t j = 0;  ///< column (or second index of a swap)
    std::int64_t factor = 1;  ///< RowAdd: row i += factor * row j; ColAdd: column i += factor * column j
};

struct Step {
    StepOp op;
    IntMatrix omega_after;
    std::string note;
};

/// Circuit in the tree-cotree edge basis: rows J then C', columns S then L'.
struct EdgeSystem {
    CircuitTopology topology;
    std::vector<EdgeKind> row_kinds;
    std::vector<EdgeKind> col_kinds;
    UnimodularTransform U_total;  ///< from the source node basis; frozen once free modes are removed
    UnimodularTransform W_total;
    std::optional<FreeModeRemoval> removal;
    std::vector<Step> steps;

    const IntMatrix& omega() const { return topology.Omega; }
    std::size_t J() const { return topology.J(); }
    std::size_t S() const { return topology.S(); }
};

EdgeSystem to_edge_basis(const CircuitTopology& topo, const TreeCotree& tc);

/// Sign flips and same-kind swaps of any kind; row pivots and row additions sourced from C' rows;
/// column pivots and column additions sourced from L' columns.
EdgeSystem structure_preserving_step(const EdgeSystem& es, const StepOp& op);

struct FundamentalForm {
    std::size_t J = 0, S = 0, f = 0, p = 0, r = 0, alpha = 0, beta = 0;
    std::vector<std::size_t> junction_rows, p_rows, harmonic_rows;
    std::vector<std::size_t> slip_cols, f_cols, harmonic_cols;
    IntMatrix Omega_JS, Omega_Jf, Omega_pS;
    bool free_modes_removed = false;

    /// [[Ω_JS, Ω_Jf, 0], [Ω_pS, 0, 0], [0, 0, I_rr]] in block order.
    IntMatrix assemble() const;
};

std::pair<EdgeSystem, FundamentalForm> fundamental_decomposition(const EdgeSystem& es);

/// Reads the block structure of an edge system already in fundamental form.
FundamentalForm read_fundamental_form(const EdgeSystem& es);

class UnsupportedSize : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ClassSignature {
    std::size_t J = 0, S = 0, f = 0, p = 0, r = 0;
    IntMatrix Omega_JS, Omega_Jf, Omega_pS;
    std::size_t orbit_size = 0;

    bool junction_only() const { return S == 0 && p == 0; }
    bool operator==(const ClassSignature& o) const {
        return J == o.J && S == o.S && f == o.f && p == o.p && Omega_JS == o.Omega_JS && Omega_Jf == o.Omega_Jf &&
               Omega_pS == o.Omega_pS;
    }
};

inline constexpr std::size_t kClassificationCap = 3;

ClassSignature canonical_signature(const FundamentalForm& ff);

/// Node-loop topology Ω' = A_new Ω_E B_new^T (B_new defaults to the identity).
CircuitTopology to_node_basis(const EdgeSystem& es, const IntMatrix& A_new,
                              const std::optional<IntMatrix>& B_new = std::nullopt);

}  // namespace scnet
