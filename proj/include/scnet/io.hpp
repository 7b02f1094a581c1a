#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scnet/decompose.hpp"
#include "scnet/dynamics.hpp"
#include "scnet/extract.hpp"
#include "scnet/graph_core.hpp"
#include "scnet/quantize.hpp"

namespace scnet {

using Json = nlohmann::ordered_json;

/// Reads a whole file; ParseError when it cannot be opened.
std::string read_text_file(const std::string& path);
/// ParseError on malformed JSON.
Json parse_json(const std::string& text);
Json read_json_file(const std::string& path);

Json to_json(const Mat& m);
Json to_json(const Vec& v);
Json to_json(const IntMatrix& m);
Mat mat_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols);
Vec vec_from_json(const Json& j, Eigen::Index size);
IntMatrix intmat_from_json(const Json& j, std::size_t rows, std::size_t cols);

/// Branch form: {"nodes", "branches", "external"}.
BranchNetlist netlist_from_json(const Json& j);
Json netlist_to_json(const BranchNetlist& net);

/// Accepts either the branch form or the matrix form {"topology": {...}}.
CircuitTopology circuit_from_json(const Json& j);
/// Matrix form, readable by circuit_from_json.
Json topology_to_json(const CircuitTopology& t);

Json diagnostics_to_json(const Diagnostics& d);
Json hamiltonian_to_json(const HamiltonianModel& h);
Json zero_limits_to_json(const ZeroLimitRecord& z);

Json step_to_json(const Step& s);
Json fundamental_form_to_json(const FundamentalForm& ff);
Json signature_to_json(const ClassSignature& s);

/// Response CSV: one row per frequency, ω followed by (re, im) pairs of H in row-major order.
/// A leading "# c_ports: a,b; l_ports: x,y" line names the ports; otherwise `c_ports` sets the split.
HybridSamples samples_from_csv(const std::string& text, std::optional<std::size_t> c_ports = std::nullopt);
std::string samples_to_csv(const HybridSamples& s);

PoleResidueModel model_from_json(const Json& j);
Json model_to_json(const PoleResidueModel& m);

struct ElementSpec {
    std::vector<JunctionInsert> junctions;
    std::vector<SlipInsert> slips;
    std::vector<PortDrive> drives;
};

/// {"junctions": [{"port", "ej", "cj", "label"}], "slips": [{"port", "es", "ls", "label"}], "drives": [{"port", "times", "values"}]}
ElementSpec elements_from_json(const Json& j);

Json synthesized_to_json(const SynthesizedCircuit& ckt);

/// {"Phi", "Q", "Phi_dot", "Q_dot"}; missing entries are zero.
ClassicalState state_from_json(const Json& j, std::size_t n, std::size_t l);

/// Columns: t, Phi_*, Q_*, Phi_dot_*, Q_dot_*, Phi_J_*, Q_S_*, energy.
void write_trajectory_csv(std::ostream& os, const StateTrajectory& tr, const CircuitTopology& topo);

}  // namespace scnet
