#include "scnet/graph_core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "scnet/errors.hpp"

namespace scnet {

namespace {

struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

std::string join_names(const std::vector<std::string>& names) {
    std::ostringstream os;
    for (std::size_t i = 0; i < names.size(); ++i) os << (i ? ", " : "") << names[i];
    return os.str();
}

/// Labels of the coordinates dominating the softest eigenvector.
std::vector<std::string> soft_directions(const Mat& m, const std::vector<std::string>& labels) {
    std::vector<std::string> out;
    if (m.rows() == 0) return out;
    JacobiResult eig = jacobi_eigen(symmetrize(m));
    Vec v = eig.vectors.col(0);
    double vmax = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) > 1e-6 * vmax) out.push_back(labels[static_cast<std::size_t>(i)]);
    return out;
}

bool is_signed_permutation(const IntMatrix& m, std::vector<std::size_t>& target) {
    target.assign(m.cols(), 0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        int count = 0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (m(i, j) == 0) continue;
            if (std::abs(m(i, j)) != 1) return false;
            ++count;
            target[j] = i;
        }
        if (count != 1) return false;
    }
    return true;
}

std::vector<std::string> transform_labels(const std::vector<std::string>& labels, const IntMatrix& M,
                                          const std::string& prefix) {
    std::vector<std::size_t> target;
    if (labels.size() == M.rows() && is_signed_permutation(M, target)) {
        std::vector<std::string> out(labels.size());
        for (std::size_t j = 0; j < labels.size(); ++j) out[target[j]] = labels[j];
        return out;
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < M.rows(); ++i) out.push_back(prefix + std::to_string(i + 1));
    return out;
}

std::vector<std::string> default_labels(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
    return out;
}

Vec int_times(const IntMatrix& m, const Vec& v) { return to_real(m) * v; }

}  // namespace

const char* to_string(BranchKind k) {
    switch (k) {
        case BranchKind::Capacitor: return "capacitor";
        case BranchKind::Inductor: return "inductor";
        case BranchKind::Josephson: return "josephson";
        case BranchKind::PhaseSlip: return "phase_slip";
        case BranchKind::Mutual: return "mutual";
    }
    return "unknown";
}

BranchKind branch_kind_from_string(const std::string& s) {
    if (s == "capacitor") return BranchKind::Capacitor;
    if (s == "inductor") return BranchKind::Inductor;
    if (s == "josephson") return BranchKind::Josephson;
    if (s == "phase_slip") return BranchKind::PhaseSlip;
    if (s == "mutual") return BranchKind::Mutual;
    throw ParseError("unknown branch kind '" + s + "'");
}

bool is_inductive(BranchKind k) { return k == BranchKind::Inductor || k == BranchKind::PhaseSlip; }
bool is_capacitive(BranchKind k) { return k == BranchKind::Capacitor || k == BranchKind::Josephson; }

Mat to_real(const IntMatrix& m) {
    Mat r(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<double>(m(i, j));
    return r;
}

Vec interpolate(const TimeSeries& ts, double t, Eigen::Index dim) {
    if (ts.empty()) return Vec::Zero(dim);
    const auto& x = ts.times;
    if (t <= x.front()) return ts.values.row(0).transpose();
    if (t >= x.back()) return ts.values.row(static_cast<Eigen::Index>(x.size() - 1)).transpose();
    auto hi = static_cast<Eigen::Index>(std::upper_bound(x.begin(), x.end(), t) - x.begin());
    double w = (t - x[hi - 1]) / (x[hi] - x[hi - 1]);
    return ((1.0 - w) * ts.values.row(hi - 1) + w * ts.values.row(hi)).transpose();
}

Vec interpolate_derivative(const TimeSeries& ts, double t, Eigen::Index dim) {
    if (ts.empty() || ts.times.size() < 2) return Vec::Zero(dim);
    const auto& x = ts.times;
    if (t < x.front() || t >= x.back()) return Vec::Zero(ts.values.cols());
    auto hi = static_cast<Eigen::Index>(std::upper_bound(x.begin(), x.end(), t) - x.begin());
    return ((ts.values.row(hi) - ts.values.row(hi - 1)) / (x[hi] - x[hi - 1])).transpose();
}

// ----------------------------------------------------------------------------
// CircuitTopology
// ----------------------------------------------------------------------------

void CircuitTopology::normalize() {
    auto n_ = static_cast<Eigen::Index>(n());
    auto l_ = static_cast<Eigen::Index>(l());
    auto J_ = static_cast<Eigen::Index>(A_J.cols());
    auto S_ = static_cast<Eigen::Index>(B_S.cols());
    if (A_J.rows() == 0 && A_J.cols() == 0) A_J = IntMatrix(n(), 0);
    if (B_S.rows() == 0 && B_S.cols() == 0) B_S = IntMatrix(l(), 0);
    if (Omega.rows() == 0 && Omega.cols() == 0) Omega = IntMatrix(n(), l());
    auto fill = [](Vec& v, Eigen::Index size) {
        if (v.size() == 0) v = Vec::Zero(size);
    };
    fill(Q_ext, n_);
    fill(N_0, n_);
    fill(Phi_ext, l_);
    fill(M_0, l_);
    fill(E_J, J_);
    fill(E_S, S_);
    fill(phi_J_offset, J_);
    fill(q_S_offset, S_);
    if (node_labels.size() != n()) node_labels = default_labels("n", n());
    if (loop_labels.size() != l()) loop_labels = default_labels("l", l());
    if (junction_labels.size() != J()) junction_labels = default_labels("J", J());
    if (slip_labels.size() != S()) slip_labels = default_labels("S", S());
}

void CircuitTopology::check_dimensions() const {
    auto bad = [](const std::string& what) { throw std::invalid_argument("dimension mismatch: " + what); };
    auto n_ = static_cast<Eigen::Index>(n());
    auto l_ = static_cast<Eigen::Index>(l());
    if (C.cols() != n_) bad("C not square");
    if (L.cols() != l_) bad("L not square");
    if (A_J.rows() != n()) bad("A_J rows");
    if (B_S.rows() != l()) bad("B_S rows");
    if (Omega.rows() != n() || Omega.cols() != l()) bad("Omega shape");
    if (Q_ext.size() != n_ || N_0.size() != n_) bad("node vectors");
    if (Phi_ext.size() != l_ || M_0.size() != l_) bad("loop vectors");
    if (E_J.size() != static_cast<Eigen::Index>(J()) || phi_J_offset.size() != E_J.size()) bad("junction vectors");
    if (E_S.size() != static_cast<Eigen::Index>(S()) || q_S_offset.size() != E_S.size()) bad("slip vectors");
    if (!q_drive.empty() && (q_drive.values.cols() != n_ ||
                             q_drive.values.rows() != static_cast<Eigen::Index>(q_drive.times.size())))
        bad("charge drive");
    if (!phi_drive.empty() && (phi_drive.values.cols() != l_ ||
                               phi_drive.values.rows() != static_cast<Eigen::Index>(phi_drive.times.size())))
        bad("flux drive");
}

CircuitTopology make_topology(const Mat& C, const Mat& L, const IntMatrix& A_J, const IntMatrix& B_S,
                              const IntMatrix& Omega) {
    CircuitTopology t;
    t.C = C;
    t.L = L;
    t.A_J = A_J;
    t.B_S = B_S;
    t.Omega = Omega;
    t.normalize();
    t.check_dimensions();
    return t;
}

// ----------------------------------------------------------------------------
// build_topology
// ----------------------------------------------------------------------------

BuildResult build_topology(const BranchNetlist& net) {
    const int node_count = static_cast<int>(net.nodes.size());
    if (node_count < 1) throw DomainViolation("netlist has no nodes (node 0 must be ground)");
    auto node_name = [&](int i) { return net.nodes[static_cast<std::size_t>(i)]; };

    std::vector<bool> capacitive(node_count, false);
    for (std::size_t b = 0; b < net.branches.size(); ++b) {
        const Branch& br = net.branches[b];
        std::string name = br.label.empty() ? "branch " + std::to_string(b) : br.label;
        if (br.kind == BranchKind::Mutual) {
            auto ok = [&](int idx) {
                return idx >= 0 && idx < static_cast<int>(net.branches.size()) &&
                       br.kind == BranchKind::Mutual && is_inductive(net.branches[idx].kind);
            };
            if (!ok(br.a) || !ok(br.b) || br.a == br.b)
                throw DomainViolation(name + ": mutual inductance must couple two distinct inductive branches");
            continue;
        }
        if (br.from < 0 || br.from >= node_count || br.to < 0 || br.to >= node_count)
            throw DomainViolation(name + ": endpoint out of range");
        if (br.from == br.to) throw DomainViolation(name + ": endpoints coincide");
        if (!(br.value > 0.0) || !std::isfinite(br.value)) {
            switch (br.kind) {
                case BranchKind::Josephson:
                    throw DomainViolation(name + ": josephson branch needs intrinsic capacitance > 0");
                case BranchKind::PhaseSlip:
                    throw DomainViolation(name + ": phase-slip branch needs intrinsic inductance > 0");
                default: throw DomainViolation(name + ": branch value must be > 0");
            }
        }
        if ((br.kind == BranchKind::Josephson || br.kind == BranchKind::PhaseSlip) &&
            (!(br.energy >= 0.0) || !std::isfinite(br.energy)))
            throw DomainViolation(name + ": tunneling energy must be finite and >= 0");
        if (is_capacitive(br.kind)) {
            capacitive[br.from] = true;
            capacitive[br.to] = true;
        }
    }
    capacitive[0] = false;

    BuildResult out;
    LoopBasis& lb = out.loops;
    CircuitTopology& t = out.topology;

    std::vector<int> row_of(node_count, -1);
    for (int i = 1; i < node_count; ++i)
        if (capacitive[i]) {
            row_of[i] = static_cast<int>(lb.capacitive_nodes.size());
            lb.capacitive_nodes.push_back(i);
            t.node_labels.push_back(node_name(i));
        }
    const std::size_t n = lb.capacitive_nodes.size();

    // capacitive connectivity to ground
    DisjointSet cap_ds(static_cast<std::size_t>(node_count));
    for (const Branch& br : net.branches)
        if (is_capacitive(br.kind)) cap_ds.unite(br.from, br.to);
    std::vector<std::string> floating;
    for (int v : lb.capacitive_nodes)
        if (cap_ds.find(v) != cap_ds.find(0)) floating.push_back(node_name(v));
    if (!floating.empty())
        throw DomainViolation("capacitive network has more than one ground component; floating nodes: " +
                              join_names(floating));

    // capacitive branches, junctions first
    std::vector<int> junctions, capacitors;
    for (std::size_t b = 0; b < net.branches.size(); ++b) {
        if (net.branches[b].kind == BranchKind::Josephson) junctions.push_back(static_cast<int>(b));
        if (net.branches[b].kind == BranchKind::Capacitor) capacitors.push_back(static_cast<int>(b));
    }
    lb.capacitive_branches = junctions;
    lb.capacitive_branches.insert(lb.capacitive_branches.end(), capacitors.begin(), capacitors.end());
    lb.A_C = IntMatrix(n, lb.capacitive_branches.size());
    Vec Cb(static_cast<Eigen::Index>(lb.capacitive_branches.size()));
    for (std::size_t c = 0; c < lb.capacitive_branches.size(); ++c) {
        const Branch& br = net.branches[lb.capacitive_branches[c]];
        if (row_of[br.from] >= 0) lb.A_C(row_of[br.from], c) += 1;
        if (row_of[br.to] >= 0) lb.A_C(row_of[br.to], c) -= 1;
        Cb(static_cast<Eigen::Index>(c)) = br.value;
        t.cap_edges.push_back({row_of[br.from], row_of[br.to], br.kind == BranchKind::Josephson,
                               br.label.empty() ? "b" + std::to_string(lb.capacitive_branches[c]) : br.label});
    }
    Mat A_C = to_real(lb.A_C);
    t.C = A_C * Cb.asDiagonal() * A_C.transpose();

    t.A_J = IntMatrix(n, junctions.size());
    t.E_J = Vec(static_cast<Eigen::Index>(junctions.size()));
    for (std::size_t j = 0; j < junctions.size(); ++j) {
        for (std::size_t i = 0; i < n; ++i) t.A_J(i, j) = lb.A_C(i, j);
        const Branch& br = net.branches[junctions[j]];
        t.E_J(static_cast<Eigen::Index>(j)) = br.energy;
        t.junction_labels.push_back(br.label.empty() ? "J" + std::to_string(j + 1) : br.label);
    }

    // inductive branches: contract capacitive nodes and ground into one super-node
    std::vector<int> inductors, slips;
    for (std::size_t b = 0; b < net.branches.size(); ++b) {
        if (net.branches[b].kind == BranchKind::Inductor) inductors.push_back(static_cast<int>(b));
        if (net.branches[b].kind == BranchKind::PhaseSlip) slips.push_back(static_cast<int>(b));
    }
    for (std::size_t b = 0; b < net.branches.size(); ++b)
        if (is_inductive(net.branches[b].kind)) lb.inductive_branches.push_back(static_cast<int>(b));
    std::map<int, std::size_t> col_of;
    for (std::size_t c = 0; c < lb.inductive_branches.size(); ++c) col_of[lb.inductive_branches[c]] = c;

    auto contracted = [&](int v) { return (v == 0 || capacitive[v]) ? 0 : v; };
    DisjointSet ind_ds(static_cast<std::size_t>(node_count));
    std::vector<int> forest, cotree;
    std::vector<int> order = inductors;
    order.insert(order.end(), slips.begin(), slips.end());
    for (int b : order) {
        const Branch& br = net.branches[b];
        if (ind_ds.unite(contracted(br.from), contracted(br.to)))
            forest.push_back(b);
        else
            cotree.push_back(b);
    }
    std::sort(cotree.begin(), cotree.end());

    // forest adjacency on contracted vertices
    std::map<int, std::vector<std::pair<int, int>>> adj;  // vertex -> (neighbour, branch)
    for (int b : forest) {
        const Branch& br = net.branches[b];
        int u = contracted(br.from), v = contracted(br.to);
        adj[u].push_back({v, b});
        adj[v].push_back({u, b});
    }
    auto forest_path = [&](int src, int dst) {
        // branches (with traversal direction) from src to dst
        std::map<int, std::pair<int, int>> prev;  // vertex -> (previous vertex, branch)
        std::queue<int> q;
        q.push(src);
        prev[src] = {src, -1};
        while (!q.empty()) {
            int x = q.front();
            q.pop();
            if (x == dst) break;
            for (auto [y, b] : adj[x])
                if (!prev.count(y)) {
                    prev[y] = {x, b};
                    q.push(y);
                }
        }
        std::vector<std::pair<int, int>> path;  // (branch, +1 along from->to)
        for (int x = dst; x != src;) {
            auto [px, b] = prev.at(x);
            const Branch& br = net.branches[b];
            int sign = (contracted(br.from) == px && contracted(br.to) == x) ? 1 : -1;
            path.push_back({b, sign});
            x = px;
        }
        return path;
    };

    const std::size_t l = cotree.size();
    lb.B_L = IntMatrix(l, lb.inductive_branches.size());
    for (std::size_t k = 0; k < l; ++k) {
        int b = cotree[k];
        const Branch& br = net.branches[b];
        lb.defining_branch.push_back(b);
        lb.B_L(k, col_of[b]) = 1;
        for (auto [fb, sign] : forest_path(contracted(br.to), contracted(br.from)))
            lb.B_L(k, col_of[fb]) += sign;
        t.loop_labels.push_back(br.label.empty() ? "l" + std::to_string(k + 1) : br.label);
    }

    // branch inductance matrix with mutual couplings
    const auto m = static_cast<Eigen::Index>(lb.inductive_branches.size());
    Mat Lb = Mat::Zero(m, m);
    for (std::size_t c = 0; c < lb.inductive_branches.size(); ++c)
        Lb(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c)) = net.branches[lb.inductive_branches[c]].value;
    for (const Branch& br : net.branches)
        if (br.kind == BranchKind::Mutual) {
            auto i = static_cast<Eigen::Index>(col_of[br.a]);
            auto j = static_cast<Eigen::Index>(col_of[br.b]);
            Lb(i, j) += br.value;
            Lb(j, i) += br.value;
        }
    if (m > 0 && !cholesky_pd_check(Lb)) throw DomainViolation("branch inductance matrix is not positive definite");
    Mat B_L = to_real(lb.B_L);
    t.L = B_L * Lb * B_L.transpose();

    IntMatrix A_L(n, lb.inductive_branches.size());
    for (std::size_t c = 0; c < lb.inductive_branches.size(); ++c) {
        const Branch& br = net.branches[lb.inductive_branches[c]];
        if (row_of[br.from] >= 0) A_L(row_of[br.from], c) += 1;
        if (row_of[br.to] >= 0) A_L(row_of[br.to], c) -= 1;
    }
    t.Omega = A_L * lb.B_L.transpose();

    t.B_S = IntMatrix(l, slips.size());
    t.E_S = Vec(static_cast<Eigen::Index>(slips.size()));
    for (std::size_t s = 0; s < slips.size(); ++s) {
        for (std::size_t k = 0; k < l; ++k) t.B_S(k, s) = lb.B_L(k, col_of[slips[s]]);
        const Branch& br = net.branches[slips[s]];
        t.E_S(static_cast<Eigen::Index>(s)) = br.energy;
        t.slip_labels.push_back(br.label.empty() ? "S" + std::to_string(s + 1) : br.label);
    }

    // offsets
    t.Q_ext = Vec::Zero(static_cast<Eigen::Index>(n));
    t.N_0 = Vec::Zero(static_cast<Eigen::Index>(n));
    auto node_vector = [&](const std::vector<double>& values, Vec& target, const char* what) {
        if (values.empty()) return;
        if (static_cast<int>(values.size()) != node_count)
            throw DomainViolation(std::string(what) + " must list one value per node");
        for (int i = 0; i < node_count; ++i) {
            if (values[i] == 0.0) continue;
            if (row_of[i] < 0)
                throw DomainViolation(std::string(what) + " on node '" + node_name(i) +
                                      "' which is ground or not capacitive");
            target(row_of[i]) = values[i];
        }
    };
    node_vector(net.q_ext, t.Q_ext, "q_ext");
    node_vector(net.n0, t.N_0, "n0");
    Vec phi_b = Vec::Zero(m), m_b = Vec::Zero(m);
    for (std::size_t c = 0; c < lb.inductive_branches.size(); ++c) {
        phi_b(static_cast<Eigen::Index>(c)) = net.branches[lb.inductive_branches[c]].phi_ext;
        m_b(static_cast<Eigen::Index>(c)) = net.branches[lb.inductive_branches[c]].m0;
    }
    t.Phi_ext = B_L * phi_b;
    t.M_0 = B_L * m_b;

    // drives share one time grid per kind
    for (const auto& d : net.drives) {
        if (d.times.size() != d.values.size() || d.times.empty())
            throw DomainViolation("drive time and value series must be nonempty and of equal length");
        if (!std::is_sorted(d.times.begin(), d.times.end()))
            throw DomainViolation("drive times must be increasing");
        TimeSeries& ts = d.on_node ? t.q_drive : t.phi_drive;
        Eigen::Index dim = static_cast<Eigen::Index>(d.on_node ? n : l);
        if (ts.empty()) {
            ts.times = d.times;
            ts.values = Mat::Zero(static_cast<Eigen::Index>(d.times.size()), dim);
        } else if (ts.times != d.times) {
            throw DomainViolation("all drives of one kind must share a time grid");
        }
        if (d.on_node) {
            if (d.index < 0 || d.index >= node_count || row_of[d.index] < 0)
                throw DomainViolation("charge drive on a node that is ground or not capacitive");
            for (std::size_t s = 0; s < d.times.size(); ++s) ts.values(static_cast<Eigen::Index>(s), row_of[d.index]) += d.values[s];
        } else {
            if (!col_of.count(d.index)) throw DomainViolation("flux drive must reference an inductive branch");
            std::size_t c = col_of[d.index];
            for (std::size_t s = 0; s < d.times.size(); ++s)
                for (std::size_t k = 0; k < l; ++k)
                    ts.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) +=
                        static_cast<double>(lb.B_L(k, c)) * d.values[s];
        }
    }

    t.normalize();

    if (n > 0 && !cholesky_pd_check(t.C))
        throw DomainViolation("capacitance matrix is singular; offending nodes: " +
                              join_names(soft_directions(t.C, t.node_labels)));
    if (l > 0 && !cholesky_pd_check(t.L))
        throw DomainViolation("inductance matrix is singular; offending loops: " +
                              join_names(soft_directions(t.L, t.loop_labels)));
    return out;
}

// ----------------------------------------------------------------------------
// validate
// ----------------------------------------------------------------------------

bool Diagnostics::has(const std::string& kind) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; });
}

Diagnostics validate(const CircuitTopology& topo) {
    Diagnostics d;
    try {
        topo.check_dimensions();
    } catch (const std::exception& e) {
        d.violations.push_back({"dimension_mismatch", e.what()});
        return d;
    }
    auto entries = [&](const IntMatrix& m, const char* name) {
        if (!m.entries_in_unit_range())
            d.violations.push_back({"entry_out_of_range", std::string(name) + " has entries outside {-1,0,1}"});
    };
    entries(topo.A_J, "A_J");
    entries(topo.B_S, "B_S");
    entries(topo.Omega, "Omega");

    std::size_t rj = integer_rank(topo.A_J);
    if (rj < topo.J())
        d.violations.push_back({"junction_only_loop", "junction-only loop: A_J has rank " + std::to_string(rj) +
                                                          " < " + std::to_string(topo.J())});
    std::size_t rs = integer_rank(topo.B_S);
    if (rs < topo.S())
        d.violations.push_back({"phase_slip_only_cutset", "phase-slip-only cutset: B_S has rank " +
                                                              std::to_string(rs) + " < " + std::to_string(topo.S())});
    if (topo.n() > 0 && !cholesky_pd_check(topo.C))
        d.violations.push_back({"non_pd_capacitance", "capacitance matrix is not symmetric positive definite"});
    if (topo.l() > 0 && !cholesky_pd_check(topo.L))
        d.violations.push_back({"non_pd_inductance", "inductance matrix is not symmetric positive definite"});
    return d;
}

// ----------------------------------------------------------------------------
// find_tree_cotree
// ----------------------------------------------------------------------------

namespace {

IntMatrix append_col(const IntMatrix& m, const std::vector<std::int64_t>& col) {
    IntMatrix r(m.rows(), m.cols() + 1);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = m(i, j);
        r(i, m.cols()) = col[i];
    }
    return r;
}

}  // namespace

TreeCotree find_tree_cotree(const CircuitTopology& topo) {
    topo.check_dimensions();
    const std::size_t n = topo.n(), l = topo.l();
    TreeCotree tc;
    tc.J = topo.J();
    tc.S = topo.S();
    if (integer_rank(topo.A_J) < tc.J)
        throw std::logic_error("infeasible spanning tree: junction edges contain a loop");
    if (integer_rank(topo.B_S) < tc.S)
        throw std::logic_error("infeasible cotree: phase-slip edges contain a cutset");

    std::vector<std::pair<std::vector<std::int64_t>, std::string>> candidates;
    if (!topo.cap_edges.empty()) {
        for (const CapEdge& e : topo.cap_edges) {
            if (e.junction) continue;
            std::vector<std::int64_t> col(n, 0);
            if (e.row_from >= 0) col[e.row_from] += 1;
            if (e.row_to >= 0) col[e.row_to] -= 1;
            candidates.push_back({col, e.label});
        }
    } else {
        const double scale = n ? topo.C.cwiseAbs().maxCoeff() : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(topo.C.row(static_cast<Eigen::Index>(i)).sum()) <= 1e-12 * scale) continue;
            std::vector<std::int64_t> col(n, 0);
            col[i] = 1;
            candidates.push_back({col, "C" + std::to_string(i + 1) + "g"});
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                if (std::abs(topo.C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) <= 1e-12 * scale)
                    continue;
                std::vector<std::int64_t> col(n, 0);
                col[i] = 1;
                col[j] = -1;
                candidates.push_back({col, "C" + std::to_string(i + 1) + std::to_string(j + 1)});
            }
    }

    tc.A_CT = topo.A_J;
    for (std::size_t j = 0; j < tc.J; ++j) tc.tree_labels.push_back(topo.junction_labels[j]);
    for (const auto& [col, label] : candidates) {
        if (tc.A_CT.cols() == n) break;
        IntMatrix trial = append_col(tc.A_CT, col);
        if (integer_rank(trial) == trial.cols()) {
            tc.A_CT = trial;
            tc.tree_labels.push_back(label);
        }
    }
    if (tc.A_CT.cols() != n || std::abs(determinant(tc.A_CT)) != 1)
        throw std::logic_error("infeasible spanning tree: capacitive edges do not span the nodes unimodularly");

    tc.B_LT = topo.B_S;
    for (std::size_t s = 0; s < tc.S; ++s) tc.cotree_labels.push_back(topo.slip_labels[s]);
    for (std::size_t k = 0; k < l && tc.B_LT.cols() < l; ++k) {
        std::vector<std::int64_t> col(l, 0);
        col[k] = 1;
        IntMatrix trial = append_col(tc.B_LT, col);
        if (integer_rank(trial) == trial.cols()) {
            tc.B_LT = trial;
            tc.cotree_labels.push_back(topo.loop_labels[k]);
        }
    }
    if (tc.B_LT.cols() != l || std::abs(determinant(tc.B_LT)) != 1)
        throw std::logic_error("infeasible cotree: loop matrix is not unimodular");
    return tc;
}

// ----------------------------------------------------------------------------
// apply_basis_change
// ----------------------------------------------------------------------------

CircuitTopology apply_basis_change(const CircuitTopology& topo, const UnimodularTransform& U,
                                   const UnimodularTransform& W) {
    topo.check_dimensions();
    if (U.size() != topo.n() || U.M.cols() != topo.n() || W.size() != topo.l() || W.M.cols() != topo.l())
        throw std::invalid_argument("dimension mismatch: basis change does not match topology");
    if (!U.consistent() || !W.consistent()) throw std::invalid_argument("basis change is not unimodular");
    Mat Ur = to_real(U.M), Wr = to_real(W.M);
    CircuitTopology t = topo;
    t.C = Ur * topo.C * Ur.transpose();
    t.L = Wr * topo.L * Wr.transpose();
    t.A_J = U.M * topo.A_J;
    t.B_S = W.M * topo.B_S;
    t.Omega = U.M * topo.Omega * W.M.transpose();
    t.Q_ext = int_times(U.M, topo.Q_ext);
    t.N_0 = int_times(U.M, topo.N_0);
    t.Phi_ext = int_times(W.M, topo.Phi_ext);
    t.M_0 = int_times(W.M, topo.M_0);
    if (!t.q_drive.empty()) t.q_drive.values = topo.q_drive.values * Ur.transpose();
    if (!t.phi_drive.empty()) t.phi_drive.values = topo.phi_drive.values * Wr.transpose();
    t.node_labels = transform_labels(topo.node_labels, U.M, "n");
    t.loop_labels = transform_labels(topo.loop_labels, W.M, "l");
    if (U.M != IntMatrix::identity(topo.n())) t.cap_edges.clear();
    return t;
}

}  // namespace scnet
