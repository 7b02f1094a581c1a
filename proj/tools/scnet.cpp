#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scnet/decompose.hpp"
#include "scnet/dynamics.hpp"
#include "scnet/errors.hpp"
#include "scnet/extract.hpp"
#include "scnet/io.hpp"
#include "scnet/quantize.hpp"

using namespace scnet;

namespace {

enum Exit { kOk = 0, kDomain = 1, kParse = 2, kNumeric = 3 };

void emit(const Json& j) { std::cout << j.dump(2) << "\n"; }

/// Labels or zero-based indices into `labels`.
std::vector<std::size_t> resolve(const std::vector<std::string>& items, const std::vector<std::string>& labels,
                                 const char* what) {
    std::vector<std::size_t> out;
    for (const std::string& s : items) {
        auto it = std::find(labels.begin(), labels.end(), s);
        if (it != labels.end()) {
            out.push_back(static_cast<std::size_t>(it - labels.begin()));
            continue;
        }
        char* end = nullptr;
        long v = std::strtol(s.c_str(), &end, 10);
        if (end && *end == '\0' && !s.empty() && v >= 0 && static_cast<std::size_t>(v) < labels.size()) {
            out.push_back(static_cast<std::size_t>(v));
            continue;
        }
        throw DomainViolation(std::string("unknown ") + what + " '" + s + "'");
    }
    return out;
}

CircuitTopology load_valid(const std::string& path) {
    CircuitTopology t = circuit_from_json(read_json_file(path));
    Diagnostics d = validate(t);
    if (!d.ok()) {
        std::cerr << diagnostics_to_json(d).dump(2) << "\n";
        throw DomainViolation("circuit failed validation");
    }
    return t;
}

int cmd_validate(const std::string& path) {
    CircuitTopology t = circuit_from_json(read_json_file(path));
    Diagnostics d = validate(t);
    emit(diagnostics_to_json(d));
    return d.ok() ? kOk : kDomain;
}

struct QuantizeArgs {
    std::string path;
    std::vector<std::string> zero_cap, zero_ind;
    bool standard = false;
};

Json quantize_topology(const CircuitTopology& input, const QuantizeArgs& a) {
    CircuitTopology t = input;
    Json out = Json::object();
    if (!a.zero_cap.empty() || !a.zero_ind.empty()) {
        CircuitTopology norm = t;
        norm.normalize();
        auto [limited, rec] = apply_zero_limits(norm, resolve(a.zero_cap, norm.node_labels, "node"),
                                                resolve(a.zero_ind, norm.loop_labels, "loop"));
        t = limited;
        out["zero_limits"] = zero_limits_to_json(rec);
    }
    HamiltonianModel h = build_hamiltonian(t, {a.standard});
    Json hj = hamiltonian_to_json(h);
    for (auto& [k, v] : out.items()) hj[k] = v;
    return hj;
}

int cmd_quantize(const QuantizeArgs& a) {
    emit(quantize_topology(load_valid(a.path), a));
    return kOk;
}

int cmd_decompose(const std::string& path, bool replay) {
    CircuitTopology t = load_valid(path);
    TreeCotree tc = find_tree_cotree(t);
    EdgeSystem es0 = to_edge_basis(t, tc);
    auto [es, ff] = fundamental_decomposition(es0);
    Json steps = Json::array();
    for (const Step& s : es.steps) steps.push_back(step_to_json(s));
    Json rows = Json::array(), cols = Json::array();
    for (EdgeKind k : es0.row_kinds) rows.push_back(to_string(k));
    for (EdgeKind k : es0.col_kinds) cols.push_back(to_string(k));
    Json report{{"edge_basis",
                 {{"Omega_E", to_json(es0.omega())},
                  {"row_kinds", rows},
                  {"col_kinds", cols},
                  {"tree_labels", tc.tree_labels},
                  {"cotree_labels", tc.cotree_labels}}},
                {"steps", steps},
                {"final_Omega_E", to_json(es.omega())},
                {"fundamental_form", fundamental_form_to_json(ff)}};
    if (es.topology.n() == es0.topology.n())
        report["node_basis_Omega"] = to_json(to_node_basis(es, IntMatrix::identity(es.topology.n())).Omega);
    try {
        report["signature"] = signature_to_json(canonical_signature(ff));
    } catch (const UnsupportedSize& e) {
        report["signature"] = nullptr;
        report["signature_note"] = e.what();
    }
    if (replay) {
        std::cerr << "Omega_E (edge basis)\n" << es0.omega().str() << "\n";
        for (std::size_t k = 0; k < es.steps.size(); ++k) {
            const Step& s = es.steps[k];
            std::cerr << "step " << k + 1 << ": " << to_string(s.op.kind) << " (" << s.op.i << ", " << s.op.j << ")";
            if (!s.note.empty()) std::cerr << "  " << s.note;
            std::cerr << "\n" << s.omega_after.str() << "\n";
        }
    }
    emit(report);
    return kOk;
}

int cmd_classify(const std::string& path) {
    CircuitTopology t = load_valid(path);
    auto [es, ff] = fundamental_decomposition(to_edge_basis(t, find_tree_cotree(t)));
    emit(signature_to_json(canonical_signature(ff)));
    return kOk;
}

struct ExtractArgs {
    std::string path;
    std::optional<std::size_t> poles;
    std::vector<double> pole_freqs;
    std::optional<std::size_t> c_ports;
    std::string elements;
    double residual_tol = 1e-6;
    double lpr_tol = 1e-8;
    bool quantize = false;
    bool model_only = false;
};

int cmd_extract(const ExtractArgs& a) {
    const std::string text = read_text_file(a.path);
    const bool json_input = a.path.size() > 5 && a.path.substr(a.path.size() - 5) == ".json";
    Json report = Json::object();
    PoleResidueModel model;
    if (json_input) {
        model = model_from_json(parse_json(text));
        model.check();
    } else {
        HybridSamples hs = samples_from_csv(text, a.c_ports);
        LprReport lpr = check_lpr(hs, a.lpr_tol);
        if (!lpr.ok()) {
            double worst_l = 0.0, worst_r = 0.0;
            for (const auto& s : lpr.samples) {
                worst_l = std::max(worst_l, s.lossless_residual);
                worst_r = std::max(worst_r, s.symmetry_residual);
            }
            std::cerr << Json{{"lossless", lpr.lossless},
                              {"reciprocal", lpr.reciprocal},
                              {"max_lossless_residual", worst_l},
                              {"max_symmetry_residual", worst_r},
                              {"tolerance", lpr.tolerance}}
                             .dump(2)
                      << "\n";
            throw DomainViolation("response data is not lossless and reciprocal");
        }
        FitOptions opts;
        opts.pole_count = a.poles.value_or(a.pole_freqs.size());
        if (!a.pole_freqs.empty()) opts.poles = a.pole_freqs;
        opts.residual_tol = a.residual_tol;
        FitResult fr = fit_pole_residue(hs, opts);
        model = fr.model;
        report["fit"] = Json{{"residual", fr.residual},
                             {"omega_rounding_residual", fr.zero_freq.rounding_residual},
                             {"samples", hs.omega.size()}};
    }
    report["model"] = model_to_json(model);
    if (a.model_only) {
        emit(report);
        return kOk;
    }
    SynthesizedCircuit ckt = synthesize(model);
    Json circuit = synthesized_to_json(ckt);
    CircuitTopology topo = ckt.topology();
    if (!a.elements.empty()) {
        ElementSpec spec = elements_from_json(read_json_file(a.elements));
        topo = reinsert_elements(ckt, spec.junctions, spec.slips, spec.drives);
        Json synth = circuit["synthesis"];
        circuit = topology_to_json(topo);
        circuit["synthesis"] = synth;
    }
    for (auto& [k, v] : report.items()) circuit[k] = v;
    if (a.quantize) circuit["hamiltonian"] = quantize_topology(topo, {});
    emit(circuit);
    return kOk;
}

struct SimulateArgs {
    std::string path;
    double t_end = 0.0;
    double dt = 0.0;
    std::string initial;
    std::size_t stride = 1;
    std::string output;
};

int cmd_simulate(const SimulateArgs& a) {
    CircuitTopology t = load_valid(a.path);
    t.normalize();
    ClassicalState s = a.initial.empty() ? ClassicalState::zero(t.n(), t.l())
                                         : state_from_json(read_json_file(a.initial), t.n(), t.l());
    if (!(a.dt > 0.0)) throw DomainViolation("--dt must be positive");
    if (!(a.t_end >= 0.0)) throw DomainViolation("--t-end must be non-negative");
    StateTrajectory tr = integrate(t, s, a.t_end, a.dt, {a.stride});
    if (a.output.empty()) {
        write_trajectory_csv(std::cout, tr, t);
    } else {
        std::ofstream out(a.output);
        if (!out) throw ParseError("cannot write '" + a.output + "'");
        write_trajectory_csv(out, tr, t);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scnet: superconducting circuit network toolkit"};
    app.require_subcommand(1);

    std::string path;
    auto* validate_cmd = app.add_subcommand("validate", "check a circuit file");
    validate_cmd->add_option("circuit", path, "netlist or topology JSON")->required();

    QuantizeArgs qa;
    auto* quantize_cmd = app.add_subcommand("quantize", "emit the structured Hamiltonian");
    quantize_cmd->add_option("circuit", qa.path, "netlist or topology JSON")->required();
    quantize_cmd->add_option("--zero-cap", qa.zero_cap, "node labels or indices with vanishing capacitance")
        ->delimiter(',');
    quantize_cmd->add_option("--zero-ind", qa.zero_ind, "loop labels or indices with vanishing inductance")
        ->delimiter(',');
    quantize_cmd->add_flag("--standard-notation", qa.standard, "relabel P as -Phi");

    bool replay = false;
    auto* decompose_cmd = app.add_subcommand("decompose", "fundamental decomposition report");
    decompose_cmd->add_option("circuit", path, "netlist or topology JSON")->required();
    decompose_cmd->add_flag("--replay", replay, "print each step to stderr");

    auto* classify_cmd = app.add_subcommand("classify", "canonical class signature");
    classify_cmd->add_option("circuit", path, "netlist or topology JSON")->required();

    ExtractArgs ea;
    auto* extract_cmd = app.add_subcommand("extract", "synthesize a circuit from a hybrid response");
    extract_cmd->add_option("response", ea.path, "response CSV or pole-residue JSON")->required();
    extract_cmd->add_option("--poles", ea.poles, "number of finite poles");
    extract_cmd->add_option("--pole-freqs", ea.pole_freqs, "known pole frequencies [rad/s]")->delimiter(',');
    extract_cmd->add_option("--c-ports", ea.c_ports, "capacitive port count when the CSV has no header");
    extract_cmd->add_option("--elements", ea.elements, "junction, phase-slip and drive file");
    extract_cmd->add_option("--residual-tol", ea.residual_tol, "maximum relative fit error");
    extract_cmd->add_option("--lpr-tol", ea.lpr_tol, "lossless reciprocal tolerance");
    extract_cmd->add_flag("--quantize", ea.quantize, "append the Hamiltonian of the extracted circuit");
    extract_cmd->add_flag("--model-only", ea.model_only, "stop after the pole-residue fit");

    SimulateArgs sa;
    auto* simulate_cmd = app.add_subcommand("simulate", "classical trajectory as CSV");
    simulate_cmd->add_option("circuit", sa.path, "netlist or topology JSON")->required();
    simulate_cmd->add_option("--t-end", sa.t_end, "end time [s]")->required();
    simulate_cmd->add_option("--dt", sa.dt, "step [s]")->required();
    simulate_cmd->add_option("--initial", sa.initial, "initial state JSON");
    simulate_cmd->add_option("--stride", sa.stride, "keep every n-th step");
    simulate_cmd->add_option("--output", sa.output, "CSV path instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kParse;
    }

    try {
        if (*validate_cmd) return cmd_validate(path);
        if (*quantize_cmd) return cmd_quantize(qa);
        if (*decompose_cmd) return cmd_decompose(path, replay);
        if (*classify_cmd) return cmd_classify(path);
        if (*extract_cmd) return cmd_extract(ea);
        if (*simulate_cmd) return cmd_simulate(sa);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kParse;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kNumeric;
    } catch (const OverflowError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kNumeric;
    } catch (const UnsupportedSize& e) {
        std::cerr << "unsupported size: " << e.what() << "\n";
        return kDomain;
    } catch (const DomainViolation& e) {
        std::cerr << "domain violation: " << e.what() << "\n";
        return kDomain;
    } catch (const std::domain_error& e) {
        std::cerr << "domain violation: " << e.what() << "\n";
        return kDomain;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDomain;
    }
    return kOk;
}
