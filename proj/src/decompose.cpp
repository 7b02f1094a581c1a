#include "scnet/decompose.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <set>
#include <stdexcept>

#include <Eigen/QR>

#include "scnet/errors.hpp"

namespace scnet {

namespace {

std::vector<std::size_t> range(std::size_t a, std::size_t b) {
    std::vector<std::size_t> v;
    for (std::size_t i = a; i < b; ++i) v.push_back(i);
    return v;
}

bool is_cap_prime(EdgeKind k) { return k == EdgeKind::Capacitor; }
bool is_ind_prime(EdgeKind k) { return k == EdgeKind::Inductor; }

UnimodularTransform elementary_add(std::size_t n, std::size_t target, std::size_t source, std::int64_t f) {
    IntMatrix m = IntMatrix::identity(n);
    m(target, source) = f;
    return {m, [&] {
                IntMatrix inv = IntMatrix::identity(n);
                inv(target, source) = -f;
                return inv;
            }()};
}

UnimodularTransform elementary_sign(std::size_t n, std::size_t i) {
    IntMatrix m = IntMatrix::identity(n);
    m(i, i) = -1;
    return {m, m};
}

UnimodularTransform elementary_swap(std::size_t n, std::size_t a, std::size_t b) {
    IntMatrix m = IntMatrix::identity(n);
    m.swap_rows(a, b);
    return {m, m};
}

void swap_vec(Vec& v, std::size_t a, std::size_t b) {
    if (static_cast<std::size_t>(v.size()) > std::max(a, b)) std::swap(v(a), v(b));
}

/// Applies U on the node side and W on the loop side, keeping the edge labels readable.
EdgeSystem transformed(const EdgeSystem& es, const UnimodularTransform& U, const UnimodularTransform& W) {
    EdgeSystem out = es;
    out.topology = apply_basis_change(es.topology, U, W);
    out.topology.node_labels = es.topology.node_labels;
    out.topology.loop_labels = es.topology.loop_labels;
    if (!out.removal || out.removal->empty()) {
        out.U_total = es.U_total.then(U);
        out.W_total = es.W_total.then(W);
    }
    return out;
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw DomainViolation("illegal structure-preserving step: " + msg);
}

/// Integer coefficients x with target = sum_k x_k basis_k (rows of an integer matrix).
std::vector<std::int64_t> integer_combination(const IntMatrix& basis, const std::vector<std::int64_t>& target) {
    const auto b = static_cast<Eigen::Index>(basis.rows()), c = static_cast<Eigen::Index>(basis.cols());
    Mat A(c, b);
    Vec y(c);
    for (Eigen::Index i = 0; i < b; ++i)
        for (Eigen::Index j = 0; j < c; ++j) A(j, i) = static_cast<double>(basis(i, j));
    for (Eigen::Index j = 0; j < c; ++j) y(j) = static_cast<double>(target[j]);
    Vec x = A.colPivHouseholderQr().solve(y);
    std::vector<std::int64_t> xi(b);
    for (Eigen::Index i = 0; i < b; ++i) xi[i] = static_cast<std::int64_t>(std::llround(x(i)));
    for (Eigen::Index j = 0; j < c; ++j) {
        std::int64_t s = 0;
        for (Eigen::Index i = 0; i < b; ++i) s = checked_add(s, checked_mul(xi[i], basis(i, j)));
        if (s != target[j]) throw std::logic_error("dependent row is not an integer combination of the basis rows");
    }
    return xi;
}

std::vector<std::int64_t> row_of(const IntMatrix& m, std::size_t i, const std::vector<std::size_t>& cols) {
    std::vector<std::int64_t> r;
    for (std::size_t j : cols) r.push_back(m(i, j));
    return r;
}

std::size_t nonzeros_in_row(const IntMatrix& m, std::size_t i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < m.cols(); ++j) c += m(i, j) != 0;
    return c;
}

std::size_t nonzeros_in_col(const IntMatrix& m, std::size_t j) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < m.rows(); ++i) c += m(i, j) != 0;
    return c;
}

class Recorder {
public:
    explicit Recorder(EdgeSystem es) : es_(std::move(es)) {}

    /// Applies the step, recording it only when it changes Omega.
    void apply(const StepOp& op, const std::string& note) {
        EdgeSystem next = structure_preserving_step(es_, op);
        if (next.topology.Omega == es_.topology.Omega && op.kind != StepKind::RowSign &&
            op.kind != StepKind::ColSign) {
            next.steps = es_.steps;
        } else {
            next.steps.back().note = note;
        }
        es_ = std::move(next);
    }

    EdgeSystem& system() { return es_; }

private:
    EdgeSystem es_;
};

}  // namespace

const char* to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::Junction: return "junction";
        case EdgeKind::Capacitor: return "capacitor";
        case EdgeKind::PhaseSlip: return "phase_slip";
        case EdgeKind::Inductor: return "inductor";
    }
    return "?";
}

const char* to_string(StepKind k) {
    switch (k) {
        case StepKind::RowPivot: return "row_pivot";
        case StepKind::ColPivot: return "col_pivot";
        case StepKind::RowSign: return "row_sign";
        case StepKind::ColSign: return "col_sign";
        case StepKind::RowSwap: return "row_swap";
        case StepKind::ColSwap: return "col_swap";
        case StepKind::RowAdd: return "row_add";
        case StepKind::ColAdd: return "col_add";
        case StepKind::FreeModes: return "free_modes";
    }
    return "?";
}

EdgeSystem to_edge_basis(const CircuitTopology& input, const TreeCotree& tc) {
    CircuitTopology topo = input;
    topo.normalize();
    const std::size_t n = topo.n(), l = topo.l();
    if (tc.A_CT.rows() != n || tc.A_CT.cols() != n || tc.B_LT.rows() != l || tc.B_LT.cols() != l)
        throw std::invalid_argument("dimension mismatch: tree/cotree does not match topology");
    EdgeSystem es;
    es.U_total = UnimodularTransform::from_matrix(tc.A_CT).inverse();
    es.W_total = UnimodularTransform::from_matrix(tc.B_LT).inverse();
    es.topology = apply_basis_change(topo, es.U_total, es.W_total);
    if (tc.tree_labels.size() == n) es.topology.node_labels = tc.tree_labels;
    if (tc.cotree_labels.size() == l) es.topology.loop_labels = tc.cotree_labels;
    for (std::size_t i = 0; i < n; ++i) es.row_kinds.push_back(i < tc.J ? EdgeKind::Junction : EdgeKind::Capacitor);
    for (std::size_t j = 0; j < l; ++j) es.col_kinds.push_back(j < tc.S ? EdgeKind::PhaseSlip : EdgeKind::Inductor);
    IntMatrix AJ = IntMatrix(n, tc.J), BS = IntMatrix(l, tc.S);
    for (std::size_t i = 0; i < tc.J; ++i) AJ(i, i) = 1;
    for (std::size_t i = 0; i < tc.S; ++i) BS(i, i) = 1;
    if (es.topology.A_J != AJ || es.topology.B_S != BS)
        throw std::logic_error("edge basis does not expose junction and phase-slip edges");
    return es;
}

EdgeSystem structure_preserving_step(const EdgeSystem& es, const StepOp& op) {
    const std::size_t n = es.topology.n(), l = es.topology.l();
    const IntMatrix& om = es.topology.Omega;
    const auto In = UnimodularTransform::identity(n);
    const auto Il = UnimodularTransform::identity(l);
    EdgeSystem out;
    switch (op.kind) {
        case StepKind::RowPivot: {
            require(op.i < n && op.j < l, "index out of range");
            require(is_cap_prime(es.row_kinds[op.i]), "row pivot on a junction row");
            require(om(op.i, op.j) != 0, "pivot on a zero entry");
            out = transformed(es, row_pivot(om, op.i, op.j).transform, Il);
            break;
        }
        case StepKind::ColPivot: {
            require(op.i < n && op.j < l, "index out of range");
            require(is_ind_prime(es.col_kinds[op.j]), "column pivot on a phase-slip column");
            require(om(op.i, op.j) != 0, "pivot on a zero entry");
            out = transformed(es, In, col_pivot(om, op.i, op.j).transform);
            break;
        }
        case StepKind::RowAdd: {
            require(op.i < n && op.j < n && op.i != op.j, "index out of range");
            require(is_cap_prime(es.row_kinds[op.j]), "row addition sourced from a junction row");
            out = transformed(es, elementary_add(n, op.i, op.j, op.factor), Il);
            break;
        }
        case StepKind::ColAdd: {
            require(op.i < l && op.j < l && op.i != op.j, "index out of range");
            require(is_ind_prime(es.col_kinds[op.j]), "column addition sourced from a phase-slip column");
            out = transformed(es, In, elementary_add(l, op.i, op.j, op.factor));
            break;
        }
        case StepKind::RowSign: {
            require(op.i < n, "index out of range");
            out = transformed(es, elementary_sign(n, op.i), Il);
            if (es.row_kinds[op.i] == EdgeKind::Junction) {
                out.topology.A_J.negate_col(op.i);
                out.topology.phi_J_offset(op.i) = -out.topology.phi_J_offset(op.i);
            }
            break;
        }
        case StepKind::ColSign: {
            require(op.j < l, "index out of range");
            out = transformed(es, In, elementary_sign(l, op.j));
            if (es.col_kinds[op.j] == EdgeKind::PhaseSlip) {
                out.topology.B_S.negate_col(op.j);
                out.topology.q_S_offset(op.j) = -out.topology.q_S_offset(op.j);
            }
            break;
        }
        case StepKind::RowSwap: {
            require(op.i < n && op.j < n, "index out of range");
            require(es.row_kinds[op.i] == es.row_kinds[op.j], "swap of rows of different kinds");
            out = transformed(es, elementary_swap(n, op.i, op.j), Il);
            std::swap(out.topology.node_labels[op.i], out.topology.node_labels[op.j]);
            if (es.row_kinds[op.i] == EdgeKind::Junction) {
                auto& t = out.topology;
                t.A_J.swap_cols(op.i, op.j);
                swap_vec(t.E_J, op.i, op.j);
                swap_vec(t.phi_J_offset, op.i, op.j);
                std::swap(t.junction_labels[op.i], t.junction_labels[op.j]);
            }
            break;
        }
        case StepKind::ColSwap: {
            require(op.i < l && op.j < l, "index out of range");
            require(es.col_kinds[op.i] == es.col_kinds[op.j], "swap of columns of different kinds");
            out = transformed(es, In, elementary_swap(l, op.i, op.j));
            std::swap(out.topology.loop_labels[op.i], out.topology.loop_labels[op.j]);
            if (es.col_kinds[op.i] == EdgeKind::PhaseSlip) {
                auto& t = out.topology;
                t.B_S.swap_cols(op.i, op.j);
                swap_vec(t.E_S, op.i, op.j);
                swap_vec(t.q_S_offset, op.i, op.j);
                std::swap(t.slip_labels[op.i], t.slip_labels[op.j]);
            }
            break;
        }
        case StepKind::FreeModes:
            throw DomainViolation("free-mode removal is not a structure-preserving step");
    }
    out.steps.push_back({op, out.topology.Omega, {}});
    return out;
}

IntMatrix FundamentalForm::assemble() const {
    IntMatrix m(J + p + r, S + f + r);
    for (std::size_t i = 0; i < J; ++i) {
        for (std::size_t j = 0; j < S; ++j) m(i, j) = Omega_JS(i, j);
        for (std::size_t j = 0; j < f; ++j) m(i, S + j) = Omega_Jf(i, j);
    }
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < S; ++j) m(J + i, j) = Omega_pS(i, j);
    for (std::size_t i = 0; i < r; ++i) m(J + p + i, S + f + i) = 1;
    return m;
}

FundamentalForm read_fundamental_form(const EdgeSystem& es) {
    const IntMatrix& om = es.topology.Omega;
    FundamentalForm ff;
    std::vector<std::size_t> cap_rows, ind_cols;
    for (std::size_t i = 0; i < es.row_kinds.size(); ++i)
        (es.row_kinds[i] == EdgeKind::Junction ? ff.junction_rows : cap_rows).push_back(i);
    for (std::size_t j = 0; j < es.col_kinds.size(); ++j)
        (es.col_kinds[j] == EdgeKind::PhaseSlip ? ff.slip_cols : ind_cols).push_back(j);
    std::set<std::size_t> harmonic_cols;
    for (std::size_t i : cap_rows) {
        std::size_t hit = om.cols();
        if (nonzeros_in_row(om, i) == 1)
            for (std::size_t j : ind_cols)
                if (om(i, j) != 0 && nonzeros_in_col(om, j) == 1) hit = j;
        if (hit < om.cols()) {
            ff.harmonic_rows.push_back(i);
            ff.harmonic_cols.push_back(hit);
            harmonic_cols.insert(hit);
        } else {
            ff.p_rows.push_back(i);
        }
    }
    for (std::size_t j : ind_cols)
        if (!harmonic_cols.count(j)) ff.f_cols.push_back(j);
    for (std::size_t i : ff.p_rows) {
        if (nonzeros_in_row(om, i) == 0) throw std::logic_error("not in fundamental form: free capacitive row");
        for (std::size_t j : ff.f_cols)
            if (om(i, j) != 0) throw std::logic_error("not in fundamental form: capacitive/inductive coupling");
    }
    for (std::size_t j : ff.f_cols)
        if (nonzeros_in_col(om, j) == 0) throw std::logic_error("not in fundamental form: free inductive column");
    ff.J = ff.junction_rows.size();
    ff.S = ff.slip_cols.size();
    ff.f = ff.f_cols.size();
    ff.p = ff.p_rows.size();
    ff.r = ff.harmonic_rows.size();
    ff.Omega_JS = om.submatrix(ff.junction_rows, ff.slip_cols);
    ff.Omega_Jf = om.submatrix(ff.junction_rows, ff.f_cols);
    ff.Omega_pS = om.submatrix(ff.p_rows, ff.slip_cols);
    if (es.removal) {
        ff.free_modes_removed = !es.removal->empty();
        ff.alpha = es.removal->alpha.size();
        ff.beta = es.removal->beta.size();
    }
    return ff;
}

std::pair<EdgeSystem, FundamentalForm> fundamental_decomposition(const EdgeSystem& input) {
    Recorder rec(input);
    auto om = [&]() -> const IntMatrix& { return rec.system().topology.Omega; };
    auto& rk = rec.system().row_kinds;
    auto& ck = rec.system().col_kinds;
    const std::size_t n = rk.size(), l = ck.size();

    std::vector<bool> hrow(n, false), hcol(l, false);
    for (;;) {
        bool found = false;
        for (std::size_t i = 0; i < n && !found; ++i) {
            if (!is_cap_prime(rk[i]) || hrow[i]) continue;
            for (std::size_t j = 0; j < l && !found; ++j) {
                if (!is_ind_prime(ck[j]) || hcol[j] || om()(i, j) == 0) continue;
                rec.apply({StepKind::ColPivot, i, j}, "harmonic pair");
                rec.apply({StepKind::RowPivot, i, j}, "harmonic pair");
                hrow[i] = hcol[j] = true;
                found = true;
            }
        }
        if (!found) break;
    }

    std::vector<std::size_t> slips, junctions;
    for (std::size_t j = 0; j < l; ++j)
        if (!is_ind_prime(ck[j])) slips.push_back(j);
    for (std::size_t i = 0; i < n; ++i)
        if (!is_cap_prime(rk[i])) junctions.push_back(i);

    std::vector<std::size_t> basis;
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_cap_prime(rk[i]) || hrow[i] || nonzeros_in_row(om(), i) == 0) continue;
        std::vector<std::size_t> trial = basis;
        trial.push_back(i);
        if (integer_rank(om().submatrix(trial, slips)) == trial.size()) {
            basis = trial;
            continue;
        }
        auto x = integer_combination(om().submatrix(basis, slips), row_of(om(), i, slips));
        for (std::size_t k = 0; k < basis.size(); ++k)
            if (x[k] != 0) rec.apply({StepKind::RowAdd, i, basis[k], -x[k]}, "dependent slip coupling");
    }
    basis.clear();
    IntMatrix omt;
    for (std::size_t j = 0; j < l; ++j) {
        if (!is_ind_prime(ck[j]) || hcol[j] || nonzeros_in_col(om(), j) == 0) continue;
        std::vector<std::size_t> trial = basis;
        trial.push_back(j);
        omt = om().transpose();
        if (integer_rank(omt.submatrix(trial, junctions)) == trial.size()) {
            basis = trial;
            continue;
        }
        auto x = integer_combination(omt.submatrix(basis, junctions), row_of(omt, j, junctions));
        for (std::size_t k = 0; k < basis.size(); ++k)
            if (x[k] != 0) rec.apply({StepKind::ColAdd, j, basis[k], -x[k]}, "dependent junction coupling");
    }

    EdgeSystem es = rec.system();
    auto [reduced, removal] = remove_free_modes(es.topology);
    if (!removal.empty()) {
        if (removal.U.M != IntMatrix::identity(n) || removal.W.M != IntMatrix::identity(l))
            throw std::logic_error("free modes are not isolated after cleanup");
        EdgeSystem next = es;
        next.topology = reduced;
        next.topology.node_labels.clear();
        next.topology.loop_labels.clear();
        next.row_kinds.clear();
        next.col_kinds.clear();
        for (std::size_t i : removal.kept_nodes) {
            next.row_kinds.push_back(es.row_kinds[i]);
            next.topology.node_labels.push_back(es.topology.node_labels[i]);
        }
        for (std::size_t j : removal.kept_loops) {
            next.col_kinds.push_back(es.col_kinds[j]);
            next.topology.loop_labels.push_back(es.topology.loop_labels[j]);
        }
        next.removal = removal;
        next.steps.push_back({{StepKind::FreeModes, removal.alpha.size(), removal.beta.size()}, reduced.Omega,
                              "free modes"});
        es = std::move(next);
    } else {
        es.removal = removal;
    }

    Recorder fin(es);
    const IntMatrix* m = &fin.system().topology.Omega;
    for (std::size_t j = 0; j < fin.system().col_kinds.size(); ++j) {
        if (!is_ind_prime(fin.system().col_kinds[j])) continue;
        for (std::size_t i = 0; i < m->rows(); ++i) {
            if ((*m)(i, j) == 0) continue;
            if ((*m)(i, j) < 0) fin.apply({StepKind::ColSign, 0, j}, "sign");
            break;
        }
        m = &fin.system().topology.Omega;
    }
    for (std::size_t i = 0; i < fin.system().row_kinds.size(); ++i) {
        if (!is_cap_prime(fin.system().row_kinds[i])) continue;
        for (std::size_t j = 0; j < m->cols(); ++j) {
            if ((*m)(i, j) == 0) continue;
            if ((*m)(i, j) < 0) fin.apply({StepKind::RowSign, i, 0}, "sign");
            break;
        }
        m = &fin.system().topology.Omega;
    }
    EdgeSystem out = fin.system();
    FundamentalForm ff = read_fundamental_form(out);
    return {out, ff};
}

// ----------------------------------------------------------------------------
// Classification
// ----------------------------------------------------------------------------

namespace {

using Key = std::vector<std::int8_t>;

struct OrbitShape {
    std::size_t J, S, f, p;
    std::size_t rows() const { return J + p; }
    std::size_t cols() const { return S + f; }
};

Key to_key(const IntMatrix& m) {
    Key k;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) k.push_back(static_cast<std::int8_t>(m(i, j)));
    return k;
}

IntMatrix from_key(const Key& k, std::size_t rows, std::size_t cols) {
    IntMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = k[i * cols + j];
    return m;
}

int order_rank(std::int8_t v) { return v == -1 ? 0 : (v == 1 ? 1 : 2); }

bool key_less(const Key& a, const Key& b) {
    auto nnz = [](const Key& k) { return std::count_if(k.begin(), k.end(), [](std::int8_t v) { return v != 0; }); };
    if (nnz(a) != nnz(b)) return nnz(a) < nnz(b);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return order_rank(a[i]) < order_rank(b[i]);
    return false;
}

bool columns_lead_positive(const IntMatrix& m) {
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i)
            if (m(i, j) != 0) {
                if (m(i, j) < 0) return false;
                break;
            }
    return true;
}

std::vector<IntMatrix> neighbours(const IntMatrix& m, const OrbitShape& sh) {
    std::vector<IntMatrix> out;
    auto swaps = [&](std::size_t first, std::size_t count, bool rows) {
        for (std::size_t a = first; a < first + count; ++a)
            for (std::size_t b = a + 1; b < first + count; ++b) {
                IntMatrix c = m;
                rows ? c.swap_rows(a, b) : c.swap_cols(a, b);
                out.push_back(std::move(c));
            }
    };
    swaps(0, sh.J, true);
    swaps(sh.J, sh.p, true);
    swaps(0, sh.S, false);
    swaps(sh.S, sh.f, false);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        IntMatrix c = m;
        c.negate_row(i);
        out.push_back(std::move(c));
    }
    for (std::size_t j = 0; j < m.cols(); ++j) {
        IntMatrix c = m;
        c.negate_col(j);
        out.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < sh.J; ++i)
        for (std::size_t j = sh.S; j < sh.cols(); ++j)
            if (m(i, j) != 0) out.push_back(col_pivot(m, i, j).matrix);
    for (std::size_t i = sh.J; i < sh.rows(); ++i)
        for (std::size_t j = 0; j < sh.S; ++j)
            if (m(i, j) != 0) out.push_back(row_pivot(m, i, j).matrix);
    return out;
}

}  // namespace

ClassSignature canonical_signature(const FundamentalForm& ff) {
    if (ff.J > kClassificationCap || ff.S > kClassificationCap || ff.f > kClassificationCap ||
        ff.p > kClassificationCap)
        throw UnsupportedSize("classification supports J, S, f, p <= " + std::to_string(kClassificationCap));
    OrbitShape sh{ff.J, ff.S, ff.f, ff.p};
    IntMatrix m(sh.rows(), sh.cols());
    for (std::size_t i = 0; i < ff.J; ++i) {
        for (std::size_t j = 0; j < ff.S; ++j) m(i, j) = ff.Omega_JS(i, j);
        for (std::size_t j = 0; j < ff.f; ++j) m(i, ff.S + j) = ff.Omega_Jf(i, j);
    }
    for (std::size_t i = 0; i < ff.p; ++i)
        for (std::size_t j = 0; j < ff.S; ++j) m(ff.J + i, j) = ff.Omega_pS(i, j);
    if (!m.entries_in_unit_range()) throw DomainViolation("fundamental form has entries outside {-1, 0, 1}");

    std::set<Key> seen;
    std::deque<Key> queue;
    Key start = to_key(m);
    seen.insert(start);
    queue.push_back(start);
    std::optional<Key> best;
    while (!queue.empty()) {
        Key k = queue.front();
        queue.pop_front();
        IntMatrix cur = from_key(k, sh.rows(), sh.cols());
        if (columns_lead_positive(cur) && (!best || key_less(k, *best))) best = k;
        for (IntMatrix& nb : neighbours(cur, sh)) {
            if (!nb.entries_in_unit_range()) throw DomainViolation("orbit left {-1, 0, 1}: input is not totally unimodular");
            Key nk = to_key(nb);
            if (seen.insert(nk).second) queue.push_back(std::move(nk));
        }
    }
    IntMatrix c = from_key(*best, sh.rows(), sh.cols());
    ClassSignature sig;
    sig.J = ff.J;
    sig.S = ff.S;
    sig.f = ff.f;
    sig.p = ff.p;
    sig.r = ff.r;
    sig.Omega_JS = c.submatrix(range(0, ff.J), range(0, ff.S));
    sig.Omega_Jf = c.submatrix(range(0, ff.J), range(ff.S, sh.cols()));
    sig.Omega_pS = c.submatrix(range(ff.J, sh.rows()), range(0, ff.S));
    sig.orbit_size = seen.size();
    return sig;
}

CircuitTopology to_node_basis(const EdgeSystem& es, const IntMatrix& A_new, const std::optional<IntMatrix>& B_new) {
    const std::size_t n = es.topology.n(), l = es.topology.l();
    auto check = [](const IntMatrix& m, std::size_t size, const char* what) {
        if (m.rows() != size || m.cols() != size)
            throw std::invalid_argument(std::string("dimension mismatch: ") + what);
        for (std::size_t j = 0; j < m.cols(); ++j) {
            int plus = 0, minus = 0;
            for (std::size_t i = 0; i < m.rows(); ++i) {
                if (m(i, j) == 1) ++plus;
                else if (m(i, j) == -1) ++minus;
                else if (m(i, j) != 0) plus = 2;
            }
            if (plus > 1 || minus > 1)
                throw DomainViolation(std::string("inconsistent incidence matrix (orthogonality violated): ") + what);
        }
        if (std::llabs(determinant(m)) != 1)
            throw DomainViolation(std::string("inconsistent incidence matrix (orthogonality violated): ") + what +
                                  " is not unimodular");
    };
    check(A_new, n, "node incidence");
    UnimodularTransform U = UnimodularTransform::from_matrix(A_new);
    UnimodularTransform W = UnimodularTransform::identity(l);
    if (B_new) {
        if (B_new->rows() != l || B_new->cols() != l) throw std::invalid_argument("dimension mismatch: loop matrix");
        if (std::llabs(determinant(*B_new)) != 1)
            throw DomainViolation("inconsistent incidence matrix (orthogonality violated): loop matrix");
        W = UnimodularTransform::from_matrix(*B_new);
    }
    CircuitTopology t = apply_basis_change(es.topology, U, W);
    if (!t.Omega.entries_in_unit_range() || !t.A_J.entries_in_unit_range())
        throw DomainViolation("inconsistent incidence matrix (orthogonality violated): entries leave {-1, 0, 1}");
    return t;
}

}  // namespace scnet
