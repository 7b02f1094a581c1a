#include "scnet/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "scnet/constants.hpp"
#include "scnet/errors.hpp"

namespace scnet {

namespace {

std::vector<std::size_t> range(std::size_t first, std::size_t last) {
    std::vector<std::size_t> out;
    for (std::size_t i = first; i < last; ++i) out.push_back(i);
    return out;
}

IntMatrix hstack(const IntMatrix& a, const IntMatrix& b) {
    IntMatrix r(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j);
        for (std::size_t j = 0; j < b.cols(); ++j) r(i, a.cols() + j) = b(i, j);
    }
    return r;
}

/// Unimodular row transform after which the zero rows of m span its left kernel.
UnimodularTransform expose_zero_rows(const IntMatrix& m, std::vector<std::size_t>& zero_rows) {
    std::vector<std::size_t> nonzero;
    zero_rows.clear();
    for (std::size_t i = 0; i < m.rows(); ++i) (m.is_zero_row(i) ? zero_rows : nonzero).push_back(i);
    IntMatrix sub = m.submatrix(nonzero, range(0, m.cols()));
    if (integer_rank(sub) == nonzero.size()) return UnimodularTransform::identity(m.rows());
    EchelonResult e = row_echelon(m);
    zero_rows = range(e.rank, m.rows());
    return e.U;
}

template <class Labels>
Labels pick(const Labels& labels, const std::vector<std::size_t>& idx) {
    Labels out;
    for (std::size_t i : idx) out.push_back(labels[i]);
    return out;
}

IntMatrix pick_rows(const IntMatrix& m, const std::vector<std::size_t>& rows) {
    return m.submatrix(rows, range(0, m.cols()));
}

TimeSeries select_series(const TimeSeries& ts, const std::vector<std::size_t>& cols) {
    if (ts.empty()) return ts;
    TimeSeries out;
    out.times = ts.times;
    out.values = select(ts.values, range(0, static_cast<std::size_t>(ts.values.rows())), cols);
    return out;
}

Vec frac(const Vec& v) {
    Vec r = v;
    for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = v(i) - std::round(v(i));
    return r;
}

std::vector<std::int64_t> column_slice(const IntMatrix& m, std::size_t col, std::size_t first, std::size_t last,
                                       std::int64_t sign) {
    std::vector<std::int64_t> out;
    for (std::size_t i = first; i < last; ++i) out.push_back(sign * m(i, col));
    return out;
}

bool is_integer_vector(const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i) - std::round(v(i))) > 1e-9) return false;
    return true;
}

}  // namespace

// ----------------------------------------------------------------------------
// Free modes
// ----------------------------------------------------------------------------

std::pair<CircuitTopology, FreeModeRemoval> remove_free_modes(const CircuitTopology& input) {
    CircuitTopology topo = input;
    topo.normalize();
    topo.check_dimensions();
    const std::size_t n = topo.n(), l = topo.l();

    FreeModeRemoval rec;
    rec.U = expose_zero_rows(hstack(topo.A_J, topo.Omega), rec.alpha);
    CircuitTopology t1 = apply_basis_change(topo, rec.U, UnimodularTransform::identity(l));
    rec.W = expose_zero_rows(hstack(t1.B_S, t1.Omega.transpose()), rec.beta);
    CircuitTopology t = apply_basis_change(t1, UnimodularTransform::identity(n), rec.W);
    rec.kept_nodes = complement(rec.alpha, n);
    rec.kept_loops = complement(rec.beta, l);
    if (rec.empty()) return {topo, rec};

    CircuitTopology r = t;
    const auto& kn = rec.kept_nodes;
    const auto& kl = rec.kept_loops;
    if (!rec.alpha.empty()) {
        Mat Caa = select(t.C, rec.alpha, rec.alpha);
        Mat G = select(t.C, kn, rec.alpha) * spd_inverse(Caa);
        r.C = symmetrize(schur_complement(t.C, kn));
        r.Q_ext = select(t.Q_ext, kn) - G * select(t.Q_ext, rec.alpha);
        r.N_0 = select(t.N_0, kn) - G * select(t.N_0, rec.alpha);
        if (!t.q_drive.empty())
            r.q_drive.values = select(t.q_drive.values, range(0, t.q_drive.times.size()), kn) -
                               select(t.q_drive.values, range(0, t.q_drive.times.size()), rec.alpha) * G.transpose();
    }
    if (!rec.beta.empty()) {
        Mat Lbb = select(t.L, rec.beta, rec.beta);
        Mat G = select(t.L, kl, rec.beta) * spd_inverse(Lbb);
        r.L = symmetrize(schur_complement(t.L, kl));
        r.Phi_ext = select(t.Phi_ext, kl) - G * select(t.Phi_ext, rec.beta);
        r.M_0 = select(t.M_0, kl) - G * select(t.M_0, rec.beta);
        if (!t.phi_drive.empty())
            r.phi_drive.values =
                select(t.phi_drive.values, range(0, t.phi_drive.times.size()), kl) -
                select(t.phi_drive.values, range(0, t.phi_drive.times.size()), rec.beta) * G.transpose();
    }
    r.A_J = pick_rows(t.A_J, kn);
    r.B_S = pick_rows(t.B_S, kl);
    r.Omega = t.Omega.submatrix(kn, kl);
    r.node_labels = pick(t.node_labels, kn);
    r.loop_labels = pick(t.loop_labels, kl);
    r.cap_edges.clear();
    r.check_dimensions();
    return {r, rec};
}

// ----------------------------------------------------------------------------
// Reduction and Hamiltonian
// ----------------------------------------------------------------------------

Reduction classify_and_reduce(const CircuitTopology& topo) {
    IdentityBlockReduction red = reduce_to_identity_block(topo.Omega);
    Reduction out;
    out.topology = apply_basis_change(topo, red.U, red.W);
    out.U = red.U;
    out.W = red.W;
    out.modes.k_indices = range(0, red.rank);
    out.modes.j_indices = range(red.rank, topo.n());
    out.modes.s_indices = range(red.rank, topo.l());
    out.modes.removed_doubly_discrete = red.rank;
    return out;
}

std::vector<std::string> HamiltonianModel::variables() const {
    std::vector<std::string> v;
    for (std::size_t i : modes.k_indices) {
        v.push_back("Q_" + std::to_string(i + 1));
        v.push_back((standard_notation ? "Phi_" : "P_") + std::to_string(i + 1));
    }
    for (std::size_t i : modes.j_indices) {
        v.push_back("n_" + std::to_string(i + 1));
        v.push_back("phi_" + std::to_string(i + 1));
    }
    for (std::size_t i : modes.s_indices) {
        v.push_back("m_" + std::to_string(i + 1));
        v.push_back("q_" + std::to_string(i + 1));
    }
    return v;
}

HamiltonianModel build_hamiltonian(const CircuitTopology& input, const HamiltonianOptions& opts) {
    auto [free_removed, removal] = remove_free_modes(input);
    Reduction red = classify_and_reduce(free_removed);
    const CircuitTopology& t = red.topology;
    const std::size_t k = red.modes.k(), n = t.n(), l = t.l();

    HamiltonianModel h;
    h.modes = red.modes;
    h.removal = removal;
    h.U_reduce = red.U;
    h.W_reduce = red.W;
    h.node_labels = t.node_labels;
    h.loop_labels = t.loop_labels;

    h.capacitive.inverse = n ? symmetrize(spd_inverse(t.C)) : Mat(0, 0);
    h.capacitive.offset = t.Q_ext - kCooperPairCharge * frac(t.N_0);
    h.capacitive.drive = t.q_drive;
    h.inductive.inverse = l ? symmetrize(spd_inverse(t.L)) : Mat(0, 0);
    h.inductive.offset = t.Phi_ext - kFluxQuantum * frac(t.M_0);
    h.inductive.drive = t.phi_drive;
    for (std::size_t i = 0; i < n; ++i)
        h.capacitive.variables.push_back((i < k ? "Q_" : "2e*n_") + std::to_string(i + 1));
    for (std::size_t i = 0; i < l; ++i)
        h.inductive.variables.push_back((i < k ? "P_" : "Phi0*m_") + std::to_string(i + 1));

    for (std::size_t c = 0; c < t.J(); ++c) {
        CosineTerm term;
        term.label = t.junction_labels[c];
        term.energy = t.E_J(static_cast<Eigen::Index>(c));
        term.coeff_ext = column_slice(t.A_J, c, 0, k, -1);
        term.coeff_compact = column_slice(t.A_J, c, k, n, 1);
        term.phase = kTwoPi * t.phi_J_offset(static_cast<Eigen::Index>(c)) / kFluxQuantum;
        h.junctions.push_back(term);
    }
    for (std::size_t c = 0; c < t.S(); ++c) {
        CosineTerm term;
        term.label = t.slip_labels[c];
        term.energy = t.E_S(static_cast<Eigen::Index>(c));
        term.coeff_ext = column_slice(t.B_S, c, 0, k, 1);
        term.coeff_compact = column_slice(t.B_S, c, k, l, 1);
        term.phase = kTwoPi * t.q_S_offset(static_cast<Eigen::Index>(c)) / kCooperPairCharge;
        h.slips.push_back(term);
    }
    return opts.standard_notation ? to_standard_notation(h) : h;
}

HamiltonianModel to_standard_notation(const HamiltonianModel& model) {
    if (model.standard_notation) return model;
    HamiltonianModel h = model;
    const std::size_t k = model.modes.k();
    Vec d = Vec::Ones(model.inductive.inverse.rows());
    for (std::size_t i = 0; i < k; ++i) d(static_cast<Eigen::Index>(i)) = -1.0;
    h.inductive.inverse = d.asDiagonal() * model.inductive.inverse * d.asDiagonal();
    h.inductive.offset = d.asDiagonal() * model.inductive.offset;
    if (!h.inductive.drive.empty()) h.inductive.drive.values = model.inductive.drive.values * d.asDiagonal();
    for (std::size_t i = 0; i < k; ++i) h.inductive.variables[i] = "Phi_" + std::to_string(i + 1);
    for (auto& term : h.junctions)
        for (auto& c : term.coeff_ext) c = -c;
    h.standard_notation = true;
    return h;
}

double evaluate_hamiltonian(const HamiltonianModel& model, const PhasePoint& p) {
    const auto k = static_cast<Eigen::Index>(model.modes.k());
    const auto j = static_cast<Eigen::Index>(model.modes.j());
    const auto s = static_cast<Eigen::Index>(model.modes.s());
    auto need = [](const Vec& v, Eigen::Index size, const char* name) {
        if (v.size() != size)
            throw std::invalid_argument(std::string("phase-space point: ") + name + " needs " + std::to_string(size) +
                                        " values");
    };
    need(p.Q_k, k, "Q_k");
    need(p.P_k, k, "P_k");
    need(p.n_j, j, "n_j");
    need(p.phi_j, j, "phi_j");
    need(p.m_s, s, "m_s");
    need(p.q_s, s, "q_s");
    if (!is_integer_vector(p.n_j)) throw std::invalid_argument("phase-space point: n_j must be integers");
    if (!is_integer_vector(p.m_s)) throw std::invalid_argument("phase-space point: m_s must be integers");

    Vec xc(k + j), xl(k + s);
    xc << p.Q_k, kCooperPairCharge * p.n_j;
    xl << p.P_k, kFluxQuantum * p.m_s;
    xc -= model.capacitive.offset + interpolate(model.capacitive.drive, p.t, k + j);
    xl -= model.inductive.offset + interpolate(model.inductive.drive, p.t, k + s);
    double energy = 0.5 * xc.dot(model.capacitive.inverse * xc) + 0.5 * xl.dot(model.inductive.inverse * xl);

    auto dot = [](const std::vector<std::int64_t>& c, const Vec& v) {
        double acc = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) acc += static_cast<double>(c[i]) * v(static_cast<Eigen::Index>(i));
        return acc;
    };
    for (const auto& term : model.junctions)
        energy -= term.energy *
                  std::cos(kTwoPi / kFluxQuantum * dot(term.coeff_ext, p.P_k) + dot(term.coeff_compact, p.phi_j) + term.phase);
    for (const auto& term : model.slips)
        energy -= term.energy * std::cos(kTwoPi / kCooperPairCharge * dot(term.coeff_ext, p.Q_k) +
                                         dot(term.coeff_compact, p.q_s) + term.phase);
    return energy;
}

// ----------------------------------------------------------------------------
// Zero capacitance / inductance limits
// ----------------------------------------------------------------------------

namespace {

struct LimitEliminator {
    IntMatrix omega;
    IntMatrix U;  ///< rows act on node charges
    IntMatrix W;  ///< rows act on loop fluxes
    std::vector<bool> zero_row;
    std::vector<bool> zero_col;

    void add_row(std::size_t t, std::size_t s, std::int64_t f) {
        omega.add_row_multiple(t, s, f);
        U.add_row_multiple(t, s, f);
    }
    void add_col(std::size_t t, std::size_t s, std::int64_t f) {
        omega.add_col_multiple(t, s, f);
        W.add_row_multiple(t, s, f);
    }
    /// Clears column c with pivot row r, touching only rows the pivot may be added to.
    void clear_column(std::size_t r, std::size_t c) {
        const std::int64_t p = omega(r, c);
        for (std::size_t i = 0; i < omega.rows(); ++i)
            if (i != r && omega(i, c) != 0 && (zero_row[r] || !zero_row[i])) add_row(i, r, -omega(i, c) * p);
    }
    void clear_row(std::size_t r, std::size_t c) {
        const std::int64_t p = omega(r, c);
        for (std::size_t j = 0; j < omega.cols(); ++j)
            if (j != c && omega(r, j) != 0 && (zero_col[c] || !zero_col[j])) add_col(j, c, -omega(r, j) * p);
    }
    void make_positive(std::size_t r, std::size_t c) {
        if (omega(r, c) < 0) {
            omega.negate_col(c);
            W.negate_row(c);
        }
    }
};

}  // namespace

std::pair<CircuitTopology, ZeroLimitRecord> apply_zero_limits(const CircuitTopology& input,
                                                              const std::vector<std::size_t>& zero_cap_nodes,
                                                              const std::vector<std::size_t>& zero_ind_loops) {
    CircuitTopology topo = input;
    topo.normalize();
    topo.check_dimensions();
    const std::size_t n = topo.n(), l = topo.l();

    ZeroLimitRecord rec;
    LimitEliminator el{topo.Omega, IntMatrix::identity(n), IntMatrix::identity(l), std::vector<bool>(n, false),
                       std::vector<bool>(l, false)};
    for (std::size_t z : zero_cap_nodes) {
        if (z >= n) throw DomainViolation("zero-capacitance node index out of range");
        for (std::size_t c = 0; c < topo.J(); ++c)
            if (topo.A_J(z, c) != 0)
                throw DomainViolation("forbidden singular limit: zero capacitance in parallel with junction '" +
                                      topo.junction_labels[c] + "'");
        el.zero_row[z] = true;
    }
    for (std::size_t y : zero_ind_loops) {
        if (y >= l) throw DomainViolation("zero-inductance loop index out of range");
        for (std::size_t c = 0; c < topo.S(); ++c)
            if (topo.B_S(y, c) != 0)
                throw DomainViolation("forbidden singular limit: zero inductance in series with phase slip '" +
                                      topo.slip_labels[c] + "'");
        el.zero_col[y] = true;
    }
    if (zero_cap_nodes.empty() && zero_ind_loops.empty()) {
        rec.U = UnimodularTransform::identity(n);
        rec.W = UnimodularTransform::identity(l);
        rec.retained_nodes = range(0, n);
        rec.retained_loops = range(0, l);
        return {topo, rec};
    }

    std::vector<bool> row_used(n, false), col_used(l, false);
    auto find_unit = [&](std::size_t r, bool want_zero_col) -> std::ptrdiff_t {
        for (std::size_t c = 0; c < l; ++c)
            if (!col_used[c] && el.zero_col[c] == want_zero_col && std::abs(el.omega(r, c)) == 1)
                return static_cast<std::ptrdiff_t>(c);
        return -1;
    };
    auto pair = [&](std::size_t r, std::size_t c) {
        el.clear_column(r, c);
        el.clear_row(r, c);
        el.make_positive(r, c);
        row_used[r] = true;
        col_used[c] = true;
    };

    // zero-capacitance rows against zero-inductance columns
    for (std::size_t r = 0; r < n; ++r) {
        if (!el.zero_row[r]) continue;
        std::ptrdiff_t c = find_unit(r, true);
        if (c < 0) continue;
        pair(r, static_cast<std::size_t>(c));
        rec.dropped_nodes.push_back(r);
        rec.dropped_loops.push_back(static_cast<std::size_t>(c));
    }
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < l; ++c)
            if (el.zero_row[r] && el.zero_col[c] && !row_used[r] && !col_used[c] && el.omega(r, c) != 0)
                throw DomainViolation("zero-capacitance node and zero-inductance loop couple with a non-unit entry");
    // remaining zero-capacitance rows against ordinary columns
    for (std::size_t r = 0; r < n; ++r) {
        if (!el.zero_row[r] || row_used[r]) continue;
        std::ptrdiff_t c = find_unit(r, false);
        if (c < 0)
            throw DomainViolation("zero-capacitance node " + topo.node_labels[r] +
                                  " touches no inductive loop; the limit is degenerate");
        pair(r, static_cast<std::size_t>(c));
        rec.zero_cap_paired.push_back(r);
        rec.constrained_loops.push_back(static_cast<std::size_t>(c));
    }
    // remaining zero-inductance columns against ordinary rows
    for (std::size_t c = 0; c < l; ++c) {
        if (!el.zero_col[c] || col_used[c]) continue;
        std::ptrdiff_t found = -1;
        for (std::size_t r = 0; r < n && found < 0; ++r)
            if (!row_used[r] && !el.zero_row[r] && std::abs(el.omega(r, c)) == 1) found = static_cast<std::ptrdiff_t>(r);
        if (found < 0)
            throw DomainViolation("zero-inductance loop " + topo.loop_labels[c] +
                                  " threads no capacitive node; the limit is degenerate");
        pair(static_cast<std::size_t>(found), c);
        rec.constrained_nodes.push_back(static_cast<std::size_t>(found));
        rec.zero_ind_paired.push_back(c);
    }
    for (std::size_t r = 0; r < n; ++r)
        if (!row_used[r]) rec.retained_nodes.push_back(r);
    for (std::size_t c = 0; c < l; ++c)
        if (!col_used[c]) rec.retained_loops.push_back(c);

    rec.U = UnimodularTransform::from_matrix(el.U);
    rec.W = UnimodularTransform::from_matrix(el.W);
    CircuitTopology t = apply_basis_change(topo, rec.U, rec.W);
    if (t.Omega != el.omega) throw std::logic_error("zero-limit elimination bookkeeping mismatch");

    const auto& r1 = rec.retained_nodes;
    const auto& r4 = rec.constrained_nodes;
    const auto& c2 = rec.retained_loops;
    const auto& c3 = rec.constrained_loops;
    const auto& r3 = rec.zero_cap_paired;
    const auto& c4 = rec.zero_ind_paired;

    Vec phi4 = select(t.Phi_ext, c4);
    Vec q3 = select(t.Q_ext, r3);
    rec.Phi_constrained = -phi4;
    rec.Q_constrained = q3;
    rec.Gamma = r1.empty() || r4.empty() ? Mat::Zero(static_cast<Eigen::Index>(r1.size()), static_cast<Eigen::Index>(r4.size()))
                                         : Mat(spd_inverse(select(t.C, r1, r1)) * select(t.C, r1, r4));
    rec.Lambda = c2.empty() || c3.empty() ? Mat::Zero(static_cast<Eigen::Index>(c2.size()), static_cast<Eigen::Index>(c3.size()))
                                          : Mat(spd_inverse(select(t.L, c2, c2)) * select(t.L, c2, c3));

    auto drive_zero = [](const TimeSeries& ts, const std::vector<std::size_t>& cols) {
        if (ts.empty()) return true;
        for (std::size_t c : cols)
            if (ts.values.col(static_cast<Eigen::Index>(c)).cwiseAbs().maxCoeff() != 0.0) return false;
        return true;
    };
    if (!drive_zero(t.q_drive, complement(r1, n)) || !drive_zero(t.phi_drive, complement(c2, l)))
        throw DomainViolation("time-dependent drives on constrained sectors are not supported in zero limits");

    IntMatrix O12 = t.Omega.submatrix(r1, c2);
    Mat O12r = to_real(O12);
    CircuitTopology out;
    out.C = select(t.C, r1, r1);
    out.L = select(t.L, c2, c2);
    out.A_J = pick_rows(t.A_J, r1);
    out.B_S = pick_rows(t.B_S, c2);
    out.Omega = O12;
    out.Q_ext = select(t.Q_ext, r1) + O12r * rec.Lambda * q3;
    out.Phi_ext = select(t.Phi_ext, c2) + O12r.transpose() * rec.Gamma * phi4;
    out.N_0 = select(t.N_0, r1);
    out.M_0 = select(t.M_0, c2);
    out.E_J = t.E_J;
    out.E_S = t.E_S;
    Mat A1 = to_real(out.A_J), A4 = to_real(pick_rows(t.A_J, r4));
    Mat B2 = to_real(out.B_S), B3 = to_real(pick_rows(t.B_S, c3));
    out.phi_J_offset = t.phi_J_offset + A1.transpose() * rec.Gamma * phi4 - A4.transpose() * phi4;
    out.q_S_offset = t.q_S_offset - B2.transpose() * rec.Lambda * q3 + B3.transpose() * q3;
    out.q_drive = select_series(t.q_drive, r1);
    out.phi_drive = select_series(t.phi_drive, c2);
    out.node_labels = pick(t.node_labels, r1);
    out.loop_labels = pick(t.loop_labels, c2);
    out.junction_labels = t.junction_labels;
    out.slip_labels = t.slip_labels;
    out.normalize();
    out.check_dimensions();
    return {out, rec};
}

}  // namespace scnet
