#pragma once

#include <vector>

#include "scnet/graph_core.hpp"

namespace scnet {

/// Node fluxes Φ [Wb], loop charges Q [C] and their time derivatives.
struct ClassicalState {
    Vec Phi;
    Vec Q;
    Vec Phi_dot;
    Vec Q_dot;

    static ClassicalState zero(std::size_t n, std::size_t l);
};

struct StateTrajectory {
    std::vector<double> t;
    Mat Phi;  ///< one row per sample
    Mat Q;
    Mat Phi_dot;
    Mat Q_dot;
    Mat Phi_J;  ///< A_J^T Φ
    Mat Q_S;    ///< B_S^T Q
    Vec energy;

    std::size_t samples() const { return t.size(); }
    ClassicalState state(std::size_t k) const;
};

struct IntegrationOptions {
    std::size_t stride = 1;  ///< keep every stride-th step (the final step is always kept)
};

StateTrajectory integrate(const CircuitTopology& topo, const ClassicalState& initial, double t_end, double dt,
                          const IntegrationOptions& opts = {});

/// Kinetic plus potential energy without drives.
double classical_energy(const CircuitTopology& topo, const ClassicalState& s);

/// 2π over the fastest rate of the system linearized about the state.
double characteristic_period(const CircuitTopology& topo, const ClassicalState& s);

struct ObservableDeviation {
    double flux = 0.0;        ///< max |ΔΦ_J| [Wb]
    double charge = 0.0;      ///< max |ΔQ_S| [C]
    double flux_scale = 0.0;  ///< max |Φ_J| of the reference
    double charge_scale = 0.0;

    /// Deviation relative to the reference amplitude of each observable.
    double relative() const;
};

ObservableDeviation compare_observables(const StateTrajectory& a, const StateTrajectory& b);

/// Φ' = U^{-T} Φ and Q' = W^{-T} Q, matching apply_basis_change(topo, U, W).
ClassicalState transform_state(const ClassicalState& s, const UnimodularTransform& U, const UnimodularTransform& W);

ClassicalState restrict_state(const ClassicalState& s, const std::vector<std::size_t>& nodes,
                              const std::vector<std::size_t>& loops);

}  // namespace scnet
