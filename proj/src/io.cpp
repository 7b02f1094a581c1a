#include "scnet/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "scnet/errors.hpp"

namespace scnet {

namespace {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("field '") + key + "': " + e.what());
    }
}

const Json& require(const Json& j, const char* key) {
    if (!j.is_object()) throw ParseError(std::string("expected an object holding '") + key + "'");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'");
    return *it;
}

double number(const Json& j, const std::string& what) {
    if (!j.is_number()) throw ParseError(what + " must be a number");
    return j.get<double>();
}

std::vector<double> numbers(const Json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + " must be an array");
    std::vector<double> v;
    for (const auto& x : j) v.push_back(number(x, what));
    return v;
}

std::vector<std::string> strings(const Json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + " must be an array");
    std::vector<std::string> v;
    for (const auto& x : j) {
        if (!x.is_string()) throw ParseError(what + " entries must be strings");
        v.push_back(x.get<std::string>());
    }
    return v;
}

Json series_to_json(const TimeSeries& ts) {
    if (ts.empty()) return nullptr;
    return Json{{"times", ts.times}, {"values", to_json(ts.values)}};
}

TimeSeries series_from_json(const Json& j, Eigen::Index width, const std::string& what) {
    TimeSeries ts;
    if (j.is_null()) return ts;
    ts.times = numbers(require(j, "times"), what + ".times");
    ts.values = mat_from_json(require(j, "values"), static_cast<Eigen::Index>(ts.times.size()), width);
    return ts;
}

Json quadratic_to_json(const QuadraticForm& q) {
    return Json{{"variables", q.variables},
                {"inverse", to_json(q.inverse)},
                {"offset", to_json(q.offset)},
                {"drive", series_to_json(q.drive)}};
}

Json cosine_to_json(const CosineTerm& c, const char* type) {
    return Json{{"type", type},           {"label", c.label},
                {"energy", c.energy},     {"coeff_ext", c.coeff_ext},
                {"coeff_compact", c.coeff_compact}, {"phase", c.phase}};
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (trim(s.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError("line " + std::to_string(line) + ": '" + trim(s) + "' is not a number");
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
}

Json read_json_file(const std::string& path) { return parse_json(read_text_file(path)); }

Json to_json(const Mat& m) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        out.push_back(row);
    }
    return out;
}

Json to_json(const Vec& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Json to_json(const IntMatrix& m) {
    Json out = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        out.push_back(row);
    }
    return out;
}

Mat mat_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols) {
    if (!j.is_array()) throw ParseError("matrix must be an array of rows");
    if (rows < 0) rows = static_cast<Eigen::Index>(j.size());
    if (cols < 0) cols = j.empty() ? 0 : static_cast<Eigen::Index>(j[0].size());
    if (static_cast<Eigen::Index>(j.size()) != rows && !(j.empty() && (rows == 0 || cols == 0)))
        throw ParseError("matrix has " + std::to_string(j.size()) + " rows, expected " + std::to_string(rows));
    Mat m = Mat::Zero(rows, cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols)
            throw ParseError("matrix row " + std::to_string(i) + " has the wrong length");
        for (std::size_t k = 0; k < j[i].size(); ++k)
            m(Eigen::Index(i), Eigen::Index(k)) = number(j[i][k], "matrix entry");
    }
    return m;
}

Vec vec_from_json(const Json& j, Eigen::Index size) {
    std::vector<double> v = numbers(j, "vector");
    if (size >= 0 && static_cast<Eigen::Index>(v.size()) != size)
        throw ParseError("vector has " + std::to_string(v.size()) + " entries, expected " + std::to_string(size));
    return Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

IntMatrix intmat_from_json(const Json& j, std::size_t rows, std::size_t cols) {
    Mat m = mat_from_json(j, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    IntMatrix out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t k = 0; k < cols; ++k) {
            double x = m(Eigen::Index(i), Eigen::Index(k));
            if (x != std::round(x)) throw ParseError("integer matrix has a fractional entry");
            out(i, k) = static_cast<std::int64_t>(x);
        }
    return out;
}

// ----------------------------------------------------------------------------
// Netlists
// ----------------------------------------------------------------------------

BranchNetlist netlist_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("netlist must be a JSON object");
    BranchNetlist net;
    const Json& nodes = require(j, "nodes");
    if (nodes.is_number_integer()) {
        int count = nodes.get<int>();
        if (count < 1) throw ParseError("'nodes' must be at least 1");
        net.nodes.push_back("gnd");
        for (int i = 1; i < count; ++i) net.nodes.push_back("n" + std::to_string(i));
    } else {
        net.nodes = strings(nodes, "nodes");
    }
    const Json& branches = require(j, "branches");
    if (!branches.is_array()) throw ParseError("'branches' must be an array");
    for (std::size_t k = 0; k < branches.size(); ++k) {
        const Json& b = branches[k];
        const std::string where = "branch " + std::to_string(k);
        if (!b.is_object()) throw ParseError(where + " must be an object");
        Branch br;
        br.kind = branch_kind_from_string(require(b, "kind").get<std::string>());
        br.label = get_or<std::string>(b, "label", "");
        br.from = get_or<int>(b, "from", 0);
        br.to = get_or<int>(b, "to", 0);
        switch (br.kind) {
            case BranchKind::Josephson:
                br.value = get_or<double>(b, "cj", get_or<double>(b, "value", 0.0));
                br.energy = number(require(b, "ej"), where + ".ej");
                break;
            case BranchKind::PhaseSlip:
                br.value = get_or<double>(b, "ls", get_or<double>(b, "value", 0.0));
                br.energy = number(require(b, "es"), where + ".es");
                break;
            case BranchKind::Mutual:
                br.value = number(require(b, "value"), where + ".value");
                if (b.contains("branches")) {
                    const Json& ab = b["branches"];
                    if (!ab.is_array() || ab.size() != 2) throw ParseError(where + ".branches must be [a, b]");
                    br.a = ab[0].get<int>();
                    br.b = ab[1].get<int>();
                } else {
                    br.a = number(require(b, "a"), where + ".a");
                    br.b = number(require(b, "b"), where + ".b");
                }
                break;
            default:
                br.value = number(require(b, "value"), where + ".value");
        }
        br.phi_ext = get_or<double>(b, "phi_ext", 0.0);
        br.m0 = get_or<double>(b, "m0", 0.0);
        net.branches.push_back(br);
    }
    if (auto ext = j.find("external"); ext != j.end() && !ext->is_null()) {
        if (!ext->is_object()) throw ParseError("'external' must be an object");
        if (ext->contains("q_ext")) net.q_ext = numbers((*ext)["q_ext"], "external.q_ext");
        if (ext->contains("n0")) net.n0 = numbers((*ext)["n0"], "external.n0");
        if (ext->contains("drives")) {
            for (const Json& d : (*ext)["drives"]) {
                BranchNetlist::Drive drv;
                if (d.contains("node")) {
                    drv.on_node = true;
                    drv.index = d["node"].get<int>();
                } else {
                    drv.on_node = false;
                    drv.index = require(d, "branch").get<int>();
                }
                drv.times = numbers(require(d, "times"), "drive times");
                drv.values = numbers(require(d, "values"), "drive values");
                net.drives.push_back(drv);
            }
        }
    }
    return net;
}

Json netlist_to_json(const BranchNetlist& net) {
    Json branches = Json::array();
    for (const Branch& b : net.branches) {
        Json o{{"kind", to_string(b.kind)}};
        if (!b.label.empty()) o["label"] = b.label;
        switch (b.kind) {
            case BranchKind::Josephson:
                o["from"] = b.from;
                o["to"] = b.to;
                o["cj"] = b.value;
                o["ej"] = b.energy;
                break;
            case BranchKind::PhaseSlip:
                o["from"] = b.from;
                o["to"] = b.to;
                o["ls"] = b.value;
                o["es"] = b.energy;
                break;
            case BranchKind::Mutual:
                o["branches"] = {b.a, b.b};
                o["value"] = b.value;
                break;
            default:
                o["from"] = b.from;
                o["to"] = b.to;
                o["value"] = b.value;
        }
        if (b.phi_ext != 0.0) o["phi_ext"] = b.phi_ext;
        if (b.m0 != 0.0) o["m0"] = b.m0;
        branches.push_back(o);
    }
    Json out{{"nodes", net.nodes}, {"branches", branches}};
    Json ext = Json::object();
    if (!net.q_ext.empty()) ext["q_ext"] = net.q_ext;
    if (!net.n0.empty()) ext["n0"] = net.n0;
    if (!net.drives.empty()) {
        Json drives = Json::array();
        for (const auto& d : net.drives)
            drives.push_back(Json{{d.on_node ? "node" : "branch", d.index}, {"times", d.times}, {"values", d.values}});
        ext["drives"] = drives;
    }
    if (!ext.empty()) out["external"] = ext;
    return out;
}

CircuitTopology circuit_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("circuit file must be a JSON object");
    auto it = j.find("topology");
    if (it == j.end()) return build_topology(netlist_from_json(j)).topology;
    const Json& o = *it;
    CircuitTopology t;
    t.C = mat_from_json(require(o, "C"), -1, -1);
    t.L = mat_from_json(require(o, "L"), -1, -1);
    const auto n = t.C.rows(), l = t.L.rows();
    if (t.C.cols() != n || t.L.cols() != l) throw ParseError("C and L must be square");
    t.Omega = o.contains("Omega") ? intmat_from_json(o["Omega"], std::size_t(n), std::size_t(l))
                                  : IntMatrix(std::size_t(n), std::size_t(l));
    auto count = [&](const char* key) -> std::size_t {
        return o.contains(key) ? numbers(o[key], key).size() : 0;
    };
    const std::size_t J = count("E_J"), S = count("E_S");
    t.A_J = o.contains("A_J") ? intmat_from_json(o["A_J"], std::size_t(n), J) : IntMatrix(std::size_t(n), J);
    t.B_S = o.contains("B_S") ? intmat_from_json(o["B_S"], std::size_t(l), S) : IntMatrix(std::size_t(l), S);
    auto vec = [&](const char* key, Eigen::Index size) { return o.contains(key) ? vec_from_json(o[key], size) : Vec(); };
    t.E_J = vec("E_J", Eigen::Index(J));
    t.E_S = vec("E_S", Eigen::Index(S));
    t.Q_ext = vec("Q_ext", n);
    t.Phi_ext = vec("Phi_ext", l);
    t.N_0 = vec("N_0", n);
    t.M_0 = vec("M_0", l);
    t.phi_J_offset = vec("phi_J_offset", Eigen::Index(J));
    t.q_S_offset = vec("q_S_offset", Eigen::Index(S));
    if (o.contains("q_drive")) t.q_drive = series_from_json(o["q_drive"], n, "q_drive");
    if (o.contains("phi_drive")) t.phi_drive = series_from_json(o["phi_drive"], l, "phi_drive");
    if (o.contains("node_labels")) t.node_labels = strings(o["node_labels"], "node_labels");
    if (o.contains("loop_labels")) t.loop_labels = strings(o["loop_labels"], "loop_labels");
    if (o.contains("junction_labels")) t.junction_labels = strings(o["junction_labels"], "junction_labels");
    if (o.contains("slip_labels")) t.slip_labels = strings(o["slip_labels"], "slip_labels");
    if (o.contains("cap_edges"))
        for (const Json& e : o["cap_edges"])
            t.cap_edges.push_back({require(e, "from").get<int>(), require(e, "to").get<int>(),
                                   get_or<bool>(e, "junction", false), get_or<std::string>(e, "label", "")});
    t.normalize();
    try {
        t.check_dimensions();
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    return t;
}

Json topology_to_json(const CircuitTopology& input) {
    CircuitTopology t = input;
    t.normalize();
    Json o{{"C", to_json(t.C)},
           {"L", to_json(t.L)},
           {"Omega", to_json(t.Omega)},
           {"A_J", to_json(t.A_J)},
           {"B_S", to_json(t.B_S)},
           {"E_J", to_json(t.E_J)},
           {"E_S", to_json(t.E_S)},
           {"Q_ext", to_json(t.Q_ext)},
           {"Phi_ext", to_json(t.Phi_ext)},
           {"N_0", to_json(t.N_0)},
           {"M_0", to_json(t.M_0)},
           {"phi_J_offset", to_json(t.phi_J_offset)},
           {"q_S_offset", to_json(t.q_S_offset)},
           {"node_labels", t.node_labels},
           {"loop_labels", t.loop_labels},
           {"junction_labels", t.junction_labels},
           {"slip_labels", t.slip_labels}};
    if (!t.q_drive.empty()) o["q_drive"] = series_to_json(t.q_drive);
    if (!t.phi_drive.empty()) o["phi_drive"] = series_to_json(t.phi_drive);
    if (!t.cap_edges.empty()) {
        Json edges = Json::array();
        for (const CapEdge& e : t.cap_edges)
            edges.push_back(Json{{"from", e.row_from}, {"to", e.row_to}, {"junction", e.junction}, {"label", e.label}});
        o["cap_edges"] = edges;
    }
    return Json{{"topology", o}};
}

// ----------------------------------------------------------------------------
// Reports
// ----------------------------------------------------------------------------

Json diagnostics_to_json(const Diagnostics& d) {
    Json v = Json::array();
    for (const Violation& x : d.violations) v.push_back(Json{{"kind", x.kind}, {"message", x.message}});
    return Json{{"ok", d.ok()}, {"violations", v}};
}

Json hamiltonian_to_json(const HamiltonianModel& h) {
    Json cos = Json::array();
    for (const auto& c : h.junctions) cos.push_back(cosine_to_json(c, "junction"));
    for (const auto& c : h.slips) cos.push_back(cosine_to_json(c, "phase_slip"));
    return Json{{"schema", "scnet.hamiltonian/1"},
                {"standard_notation", h.standard_notation},
                {"modes",
                 {{"k", h.modes.k()},
                  {"j", h.modes.j()},
                  {"s", h.modes.s()},
                  {"removed_doubly_discrete", h.modes.removed_doubly_discrete},
                  {"free_nodes_removed", h.removal.alpha.size()},
                  {"free_loops_removed", h.removal.beta.size()}}},
                {"variables", h.variables()},
                {"quadratic_capacitive", quadratic_to_json(h.capacitive)},
                {"quadratic_inductive", quadratic_to_json(h.inductive)},
                {"cosines", cos},
                {"U_reduce", to_json(h.U_reduce.M)},
                {"W_reduce", to_json(h.W_reduce.M)},
                {"node_labels", h.node_labels},
                {"loop_labels", h.loop_labels}};
}

Json zero_limits_to_json(const ZeroLimitRecord& z) {
    return Json{{"retained_nodes", z.retained_nodes},   {"constrained_nodes", z.constrained_nodes},
                {"zero_cap_paired", z.zero_cap_paired}, {"retained_loops", z.retained_loops},
                {"constrained_loops", z.constrained_loops}, {"zero_ind_paired", z.zero_ind_paired},
                {"dropped_nodes", z.dropped_nodes},     {"dropped_loops", z.dropped_loops}};
}

Json step_to_json(const Step& s) {
    Json o{{"kind", to_string(s.op.kind)}, {"i", s.op.i}, {"j", s.op.j}};
    if (s.op.kind == StepKind::RowAdd || s.op.kind == StepKind::ColAdd) o["factor"] = s.op.factor;
    o["omega_after"] = to_json(s.omega_after);
    if (!s.note.empty()) o["note"] = s.note;
    return o;
}

Json fundamental_form_to_json(const FundamentalForm& ff) {
    return Json{{"J", ff.J},
                {"S", ff.S},
                {"f", ff.f},
                {"p", ff.p},
                {"r", ff.r},
                {"alpha", ff.alpha},
                {"beta", ff.beta},
                {"junction_rows", ff.junction_rows},
                {"p_rows", ff.p_rows},
                {"harmonic_rows", ff.harmonic_rows},
                {"slip_cols", ff.slip_cols},
                {"f_cols", ff.f_cols},
                {"harmonic_cols", ff.harmonic_cols},
                {"Omega_JS", to_json(ff.Omega_JS)},
                {"Omega_Jf", to_json(ff.Omega_Jf)},
                {"Omega_pS", to_json(ff.Omega_pS)},
                {"free_modes_removed", ff.free_modes_removed},
                {"assembled", to_json(ff.assemble())}};
}

Json signature_to_json(const ClassSignature& s) {
    return Json{{"J", s.J},
                {"S", s.S},
                {"f", s.f},
                {"p", s.p},
                {"r", s.r},
                {"junction_only", s.junction_only()},
                {"Omega_JS", to_json(s.Omega_JS)},
                {"Omega_Jf", to_json(s.Omega_Jf)},
                {"Omega_pS", to_json(s.Omega_pS)},
                {"orbit_size", s.orbit_size}};
}

// ----------------------------------------------------------------------------
// Response data
// ----------------------------------------------------------------------------

HybridSamples samples_from_csv(const std::string& text, std::optional<std::size_t> c_ports) {
    HybridSamples hs;
    std::optional<PortSet> named;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0, N = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty()) continue;
        if (s[0] == '#') {
            auto body = trim(s.substr(1));
            if (body.rfind("c_ports:", 0) == 0) {
                PortSet ps;
                for (const std::string& part : split(body, ';')) {
                    auto kv = split(part, ':');
                    if (kv.size() != 2) throw ParseError("line " + std::to_string(lineno) + ": bad port header");
                    std::vector<std::string> labels;
                    for (const auto& x : split(kv[1], ','))
                        if (!trim(x).empty()) labels.push_back(trim(x));
                    if (trim(kv[0]) == "c_ports") ps.c_labels = labels;
                    else if (trim(kv[0]) == "l_ports") ps.l_labels = labels;
                    else throw ParseError("line " + std::to_string(lineno) + ": unknown header key");
                }
                named = ps;
            }
            continue;
        }
        auto cells = split(s, ',');
        if (std::isalpha(static_cast<unsigned char>(trim(cells[0]).front())) && hs.omega.empty()) continue;
        if (cells.size() < 3 || (cells.size() - 1) % 2 != 0)
            throw ParseError("line " + std::to_string(lineno) + ": expected omega then (re, im) pairs");
        std::size_t entries = (cells.size() - 1) / 2;
        auto side = static_cast<std::size_t>(std::llround(std::sqrt(double(entries))));
        if (side * side != entries) throw ParseError("line " + std::to_string(lineno) + ": entry count is not square");
        if (N == 0) N = side;
        if (side != N) throw ParseError("line " + std::to_string(lineno) + ": inconsistent matrix size");
        hs.omega.push_back(parse_double(cells[0], lineno));
        CMat H(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
        for (std::size_t e = 0; e < entries; ++e)
            H(Eigen::Index(e / N), Eigen::Index(e % N)) =
                cplx(parse_double(cells[1 + 2 * e], lineno), parse_double(cells[2 + 2 * e], lineno));
        hs.H.push_back(H);
    }
    if (hs.omega.empty()) throw ParseError("response file holds no samples");
    if (named) {
        if (named->size() != N) throw ParseError("port header names " + std::to_string(named->size()) +
                                                 " ports but the matrices are " + std::to_string(N) + " wide");
        hs.ports = *named;
    } else {
        if (!c_ports) throw ParseError("response file has no port header; give the capacitive port count");
        if (*c_ports > N) throw ParseError("capacitive port count exceeds the matrix size");
        hs.ports = PortSet::numbered(*c_ports, N - *c_ports);
    }
    return hs;
}

std::string samples_to_csv(const HybridSamples& s) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "# c_ports: ";
    for (std::size_t i = 0; i < s.ports.c_labels.size(); ++i) os << (i ? "," : "") << s.ports.c_labels[i];
    os << "; l_ports: ";
    for (std::size_t i = 0; i < s.ports.l_labels.size(); ++i) os << (i ? "," : "") << s.ports.l_labels[i];
    os << "\n";
    for (std::size_t k = 0; k < s.omega.size(); ++k) {
        os << s.omega[k];
        for (Eigen::Index i = 0; i < s.H[k].rows(); ++i)
            for (Eigen::Index j = 0; j < s.H[k].cols(); ++j) os << ',' << s.H[k](i, j).real() << ',' << s.H[k](i, j).imag();
        os << "\n";
    }
    return os.str();
}

PoleResidueModel model_from_json(const Json& j) {
    PoleResidueModel m;
    const Json& ports = require(j, "ports");
    m.ports.c_labels = strings(require(ports, "capacitive"), "ports.capacitive");
    m.ports.l_labels = strings(require(ports, "inductive"), "ports.inductive");
    const auto c = static_cast<Eigen::Index>(m.ports.C()), l = static_cast<Eigen::Index>(m.ports.L());
    m.Omega_E = j.contains("Omega_E") ? intmat_from_json(j["Omega_E"], m.ports.C(), m.ports.L())
                                      : IntMatrix(m.ports.C(), m.ports.L());
    m.K_CC = mat_from_json(require(j, "K_CC"), c, c);
    m.K_LL = mat_from_json(require(j, "K_LL"), l, l);
    if (j.contains("poles"))
        for (const Json& p : j["poles"]) {
            Pole pole;
            pole.omega = number(require(p, "omega"), "pole omega");
            pole.R_C = p.contains("R_C") ? vec_from_json(p["R_C"], c) : Vec::Zero(c);
            pole.R_L = p.contains("R_L") ? vec_from_json(p["R_L"], l) : Vec::Zero(l);
            m.poles.push_back(pole);
        }
    return m;
}

Json model_to_json(const PoleResidueModel& m) {
    Json poles = Json::array();
    for (const Pole& p : m.poles) poles.push_back(Json{{"omega", p.omega}, {"R_C", to_json(p.R_C)}, {"R_L", to_json(p.R_L)}});
    return Json{{"ports", {{"capacitive", m.ports.c_labels}, {"inductive", m.ports.l_labels}}},
                {"Omega_E", to_json(m.Omega_E)},
                {"K_CC", to_json(m.K_CC)},
                {"K_LL", to_json(m.K_LL)},
                {"poles", poles}};
}

ElementSpec elements_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("element file must be a JSON object");
    ElementSpec spec;
    if (j.contains("junctions"))
        for (const Json& x : j["junctions"])
            spec.junctions.push_back({require(x, "port").get<std::string>(), number(require(x, "ej"), "ej"),
                                      get_or<double>(x, "cj", 0.0), get_or<std::string>(x, "label", "")});
    if (j.contains("slips"))
        for (const Json& x : j["slips"])
            spec.slips.push_back({require(x, "port").get<std::string>(), number(require(x, "es"), "es"),
                                  get_or<double>(x, "ls", 0.0), get_or<std::string>(x, "label", "")});
    if (j.contains("drives"))
        for (const Json& x : j["drives"])
            spec.drives.push_back({require(x, "port").get<std::string>(), numbers(require(x, "times"), "times"),
                                   numbers(require(x, "values"), "values")});
    return spec;
}

Json synthesized_to_json(const SynthesizedCircuit& ckt) {
    Json out = topology_to_json(ckt.topology());
    out["synthesis"] = Json{{"ports", {{"capacitive", ckt.ports.c_labels}, {"inductive", ckt.ports.l_labels}}},
                            {"resonators", ckt.resonators},
                            {"omega_r", to_json(ckt.omega_r)},
                            {"C_rr", to_json(ckt.C_rr)},
                            {"L_rr", to_json(ckt.L_rr)}};
    return out;
}

ClassicalState state_from_json(const Json& j, std::size_t n, std::size_t l) {
    if (!j.is_object()) throw ParseError("initial state must be a JSON object");
    ClassicalState s = ClassicalState::zero(n, l);
    const auto N = static_cast<Eigen::Index>(n), Lc = static_cast<Eigen::Index>(l);
    if (j.contains("Phi")) s.Phi = vec_from_json(j["Phi"], N);
    if (j.contains("Q")) s.Q = vec_from_json(j["Q"], Lc);
    if (j.contains("Phi_dot")) s.Phi_dot = vec_from_json(j["Phi_dot"], N);
    if (j.contains("Q_dot")) s.Q_dot = vec_from_json(j["Q_dot"], Lc);
    return s;
}

void write_trajectory_csv(std::ostream& os, const StateTrajectory& tr, const CircuitTopology& input) {
    CircuitTopology t = input;
    t.normalize();
    os << "t";
    for (const auto& x : t.node_labels) os << ",Phi_" << x;
    for (const auto& x : t.loop_labels) os << ",Q_" << x;
    for (const auto& x : t.node_labels) os << ",Phi_dot_" << x;
    for (const auto& x : t.loop_labels) os << ",Q_dot_" << x;
    for (const auto& x : t.junction_labels) os << ",Phi_J_" << x;
    for (const auto& x : t.slip_labels) os << ",Q_S_" << x;
    os << ",energy\n";
    const auto old = os.precision(12);
    for (std::size_t k = 0; k < tr.samples(); ++k) {
        const auto r = static_cast<Eigen::Index>(k);
        os << tr.t[k];
        for (const Mat* m : {&tr.Phi, &tr.Q, &tr.Phi_dot, &tr.Q_dot, &tr.Phi_J, &tr.Q_S})
            for (Eigen::Index c = 0; c < m->cols(); ++c) os << ',' << (*m)(r, c);
        os << ',' << tr.energy(r) << "\n";
    }
    os.precision(old);
}

}  // namespace scnet
