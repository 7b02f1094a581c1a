#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "scnet/graph_core.hpp"

namespace scnet {

using cplx = std::complex<double>;

/// Ports ordered capacitive first, then inductive.
struct PortSet {
    std::vector<std::string> c_labels;
    std::vector<std::string> l_labels;

    std::size_t C() const { return c_labels.size(); }
    std::size_t L() const { return l_labels.size(); }
    std::size_t size() const { return C() + L(); }

    static PortSet numbered(std::size_t c, std::size_t l);
};

/// Hybrid response samples H(iω): rows (I_C, V_L), columns (V_C, I_L).
struct HybridSamples {
    PortSet ports;
    std::vector<double> omega;  ///< rad/s, strictly increasing
    std::vector<CMat> H;

    void check() const;
};

struct Pole {
    double omega = 0.0;  ///< rad/s
    Vec R_C;             ///< √F
    Vec R_L;             ///< √H
};

struct PoleResidueModel {
    PortSet ports;
    IntMatrix Omega_E;
    Mat K_CC;  ///< F
    Mat K_LL;  ///< H
    std::vector<Pole> poles;

    void check() const;
};

struct SynthesizedCircuit {
    PortSet ports;
    std::size_t resonators = 0;
    IntMatrix Omega;  ///< [[Ω_E, 0], [0, I_rr]]
    Mat C;            ///< (C + r) square
    Mat L;            ///< (L + r) square
    Vec C_rr;
    Vec L_rr;
    Vec omega_r;

    /// Linear topology in the edge basis: rows are capacitive ports then resonators.
    CircuitTopology topology() const;
};

struct LprSampleReport {
    double omega = 0.0;
    double lossless_residual = 0.0;  ///< ‖H + H†‖ / ‖H‖
    double symmetry_residual = 0.0;  ///< hybrid reciprocity, relative
};

struct LprReport {
    std::vector<LprSampleReport> samples;
    double tolerance = 0.0;
    bool lossless = true;
    bool reciprocal = true;
    bool ok() const { return lossless && reciprocal; }
};

LprReport check_lpr(const HybridSamples& samples, double tol = 1e-8);

struct ZeroFrequencyResult {
    IntMatrix Omega_E;
    double rounding_residual = 0.0;  ///< max |entry - round(entry)|
    double diagonal_residual = 0.0;  ///< extrapolated diagonal blocks relative to the lowest sample
    Mat H0_offdiag;                  ///< extrapolated upper-right block of H(0)
};

inline constexpr double kOmegaRoundingTol = 1e-6;
inline constexpr double kZeroFreqDiagonalTol = 1e-3;

ZeroFrequencyResult extract_zero_freq(const HybridSamples& samples);
IntMatrix extract_zero_freq(const PoleResidueModel& model);

struct ResidueVectors {
    Vec R_C;
    Vec R_L;
};

/// Real outer-product factors of a hybrid pole residue K (taken at s = iω).
std::vector<ResidueVectors> decompose_residues(const CMat& K, double omega, std::size_t c_ports,
                                               double psd_tol = 1e-10);

/// Residue of the pole at s = iω of a single resonator term with the given factors.
CMat residue_matrix(const std::vector<ResidueVectors>& vectors, double omega);

struct FitOptions {
    std::size_t pole_count = 0;
    std::optional<std::vector<double>> poles;  ///< skip pole location when given
    double residual_tol = 1e-6;
    double psd_tol = 1e-10;
    int refine_sweeps = 3;
};

struct FitResult {
    PoleResidueModel model;
    double residual = 0.0;  ///< max over samples of the relative fit error
    ZeroFrequencyResult zero_freq;
};

FitResult fit_pole_residue(const HybridSamples& samples, const FitOptions& opts);

SynthesizedCircuit synthesize(const PoleResidueModel& model);

CMat eval_hybrid(const PoleResidueModel& model, cplx s);
CMat eval_hybrid(const SynthesizedCircuit& circuit, cplx s);

HybridSamples sample_hybrid(const SynthesizedCircuit& circuit, const std::vector<double>& omega);
HybridSamples sample_hybrid(const PoleResidueModel& model, const std::vector<double>& omega);

/// Blockwise relative difference, with unit floor on the dimensionless off-diagonal blocks.
double hybrid_relative_error(const CMat& a, const CMat& b, std::size_t c_ports);

struct JunctionInsert {
    std::string port;
    double E_J = 0.0;
    double extra_capacitance = 0.0;
    std::string label;
};

struct SlipInsert {
    std::string port;
    double E_S = 0.0;
    double extra_inductance = 0.0;
    std::string label;
};

/// Charge drive on a capacitive port or flux drive on an inductive port.
struct PortDrive {
    std::string port;
    std::vector<double> times;
    std::vector<double> values;  ///< C for capacitive ports, Wb for inductive ports
};

CircuitTopology reinsert_elements(const SynthesizedCircuit& circuit, const std::vector<JunctionInsert>& junctions,
                                  const std::vector<SlipInsert>& slips, const std::vector<PortDrive>& drives = {});

}  // namespace scnet
