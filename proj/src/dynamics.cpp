#include "scnet/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "scnet/constants.hpp"

namespace scnet {

namespace {

struct System {
    const CircuitTopology& t;
    Mat Cinv, Linv, AJ, BS, Om;
    Eigen::Index n, l;

    explicit System(const CircuitTopology& topo) : t(topo) {
        n = static_cast<Eigen::Index>(t.n());
        l = static_cast<Eigen::Index>(t.l());
        Cinv = n ? spd_inverse(t.C) : Mat(0, 0);
        Linv = l ? spd_inverse(t.L) : Mat(0, 0);
        AJ = to_real(t.A_J);
        BS = to_real(t.B_S);
        Om = to_real(t.Omega);
    }

    Vec junction_current(const Vec& Phi) const {
        Vec arg = AJ.transpose() * Phi + t.phi_J_offset;
        Vec I(arg.size());
        for (Eigen::Index i = 0; i < arg.size(); ++i)
            I(i) = kTwoPi * t.E_J(i) / kFluxQuantum * std::sin(kTwoPi / kFluxQuantum * arg(i));
        return I;
    }

    Vec slip_voltage(const Vec& Q) const {
        Vec arg = BS.transpose() * Q + t.q_S_offset;
        Vec V(arg.size());
        for (Eigen::Index i = 0; i < arg.size(); ++i)
            V(i) = kTwoPi * t.E_S(i) / kCooperPairCharge * std::sin(kTwoPi / kCooperPairCharge * arg(i));
        return V;
    }

    /// y = (Φ, Q, Φ̇, Q̇)
    Vec rhs(double time, const Vec& y) const {
        Vec Phi = y.segment(0, n), Q = y.segment(n, l), Phid = y.segment(n + l, n), Qd = y.segment(2 * n + l, l);
        Vec dQext = interpolate_derivative(t.q_drive, time, n);
        Vec dPhiext = interpolate_derivative(t.phi_drive, time, l);
        Vec out(y.size());
        out.segment(0, n) = Phid;
        out.segment(n, l) = Qd;
        out.segment(n + l, n) = Cinv * (-dQext - AJ * junction_current(Phi) + Om * Qd);
        out.segment(2 * n + l, l) = Linv * (-dPhiext - BS * slip_voltage(Q) - Om.transpose() * Phid);
        return out;
    }

    Vec pack(const ClassicalState& s) const {
        Vec y(2 * (n + l));
        y << s.Phi, s.Q, s.Phi_dot, s.Q_dot;
        return y;
    }

    ClassicalState unpack(const Vec& y) const {
        return {y.segment(0, n), y.segment(n, l), y.segment(n + l, n), y.segment(2 * n + l, l)};
    }
};

void check_state(const CircuitTopology& t, const ClassicalState& s) {
    if (static_cast<std::size_t>(s.Phi.size()) != t.n() || static_cast<std::size_t>(s.Phi_dot.size()) != t.n() ||
        static_cast<std::size_t>(s.Q.size()) != t.l() || static_cast<std::size_t>(s.Q_dot.size()) != t.l())
        throw std::invalid_argument("dimension mismatch: initial state does not match topology");
}

}  // namespace

ClassicalState ClassicalState::zero(std::size_t n, std::size_t l) {
    auto N = static_cast<Eigen::Index>(n), L = static_cast<Eigen::Index>(l);
    return {Vec::Zero(N), Vec::Zero(L), Vec::Zero(N), Vec::Zero(L)};
}

ClassicalState StateTrajectory::state(std::size_t k) const {
    auto i = static_cast<Eigen::Index>(k);
    return {Phi.row(i).transpose(), Q.row(i).transpose(), Phi_dot.row(i).transpose(), Q_dot.row(i).transpose()};
}

double classical_energy(const CircuitTopology& topo, const ClassicalState& s) {
    double e = 0.5 * s.Phi_dot.dot(topo.C * s.Phi_dot) + 0.5 * s.Q_dot.dot(topo.L * s.Q_dot);
    Vec argJ = to_real(topo.A_J).transpose() * s.Phi + topo.phi_J_offset;
    Vec argS = to_real(topo.B_S).transpose() * s.Q + topo.q_S_offset;
    for (Eigen::Index i = 0; i < argJ.size(); ++i) e -= topo.E_J(i) * std::cos(kTwoPi / kFluxQuantum * argJ(i));
    for (Eigen::Index i = 0; i < argS.size(); ++i) e -= topo.E_S(i) * std::cos(kTwoPi / kCooperPairCharge * argS(i));
    return e;
}

StateTrajectory integrate(const CircuitTopology& input, const ClassicalState& initial, double t_end, double dt,
                          const IntegrationOptions& opts) {
    CircuitTopology topo = input;
    topo.normalize();
    topo.check_dimensions();
    check_state(topo, initial);
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be non-negative");
    const std::size_t stride = std::max<std::size_t>(1, opts.stride);
    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    System sys(topo);
    const Eigen::Index n = sys.n, l = sys.l;
    const auto kept = static_cast<Eigen::Index>(steps / stride + 1 + (steps % stride ? 1 : 0));

    StateTrajectory tr;
    tr.Phi.resize(kept, n);
    tr.Q.resize(kept, l);
    tr.Phi_dot.resize(kept, n);
    tr.Q_dot.resize(kept, l);
    tr.Phi_J.resize(kept, static_cast<Eigen::Index>(topo.J()));
    tr.Q_S.resize(kept, static_cast<Eigen::Index>(topo.S()));
    tr.energy.resize(kept);
    Eigen::Index row = 0;
    auto store = [&](double time, const Vec& y) {
        ClassicalState s = sys.unpack(y);
        tr.t.push_back(time);
        tr.Phi.row(row) = s.Phi.transpose();
        tr.Q.row(row) = s.Q.transpose();
        tr.Phi_dot.row(row) = s.Phi_dot.transpose();
        tr.Q_dot.row(row) = s.Q_dot.transpose();
        tr.Phi_J.row(row) = (sys.AJ.transpose() * s.Phi).transpose();
        tr.Q_S.row(row) = (sys.BS.transpose() * s.Q).transpose();
        tr.energy(row) = classical_energy(topo, s);
        ++row;
    };

    Vec y = sys.pack(initial);
    store(0.0, y);
    for (std::size_t k = 1; k <= steps; ++k) {
        double t0 = static_cast<double>(k - 1) * dt;
        Vec k1 = sys.rhs(t0, y);
        Vec k2 = sys.rhs(t0 + 0.5 * dt, y + 0.5 * dt * k1);
        Vec k3 = sys.rhs(t0 + 0.5 * dt, y + 0.5 * dt * k2);
        Vec k4 = sys.rhs(t0 + dt, y + dt * k3);
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!y.allFinite())
            throw NumericError("integration blew up at t = " + std::to_string(t0 + dt) + " s; reduce the step size");
        if (k % stride == 0 || k == steps) store(static_cast<double>(k) * dt, y);
    }
    return tr;
}

double characteristic_period(const CircuitTopology& input, const ClassicalState& s) {
    CircuitTopology topo = input;
    topo.normalize();
    check_state(topo, s);
    System sys(topo);
    const Eigen::Index n = sys.n, l = sys.l, m = n + l;
    Mat Minv = Mat::Zero(m, m), K = Mat::Zero(m, m), G = Mat::Zero(m, m);
    if (n) Minv.topLeftCorner(n, n) = sys.Cinv;
    if (l) Minv.bottomRightCorner(l, l) = sys.Linv;
    Vec argJ = sys.AJ.transpose() * s.Phi + topo.phi_J_offset;
    Vec argS = sys.BS.transpose() * s.Q + topo.q_S_offset;
    Vec kJ(argJ.size()), kS(argS.size());
    const double wJ = kTwoPi / kFluxQuantum, wS = kTwoPi / kCooperPairCharge;
    for (Eigen::Index i = 0; i < argJ.size(); ++i) kJ(i) = topo.E_J(i) * wJ * wJ * std::cos(wJ * argJ(i));
    for (Eigen::Index i = 0; i < argS.size(); ++i) kS(i) = topo.E_S(i) * wS * wS * std::cos(wS * argS(i));
    if (n) K.topLeftCorner(n, n) = sys.AJ * kJ.asDiagonal() * sys.AJ.transpose();
    if (l) K.bottomRightCorner(l, l) = sys.BS * kS.asDiagonal() * sys.BS.transpose();
    if (n && l) {
        G.topRightCorner(n, l) = sys.Om;
        G.bottomLeftCorner(l, n) = -sys.Om.transpose();
    }
    Mat A = Mat::Zero(2 * m, 2 * m);
    A.topRightCorner(m, m) = Mat::Identity(m, m);
    A.bottomLeftCorner(m, m) = -Minv * K;
    A.bottomRightCorner(m, m) = Minv * G;
    Eigen::EigenSolver<Mat> es(A, false);
    double rate = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) rate = std::max(rate, std::abs(es.eigenvalues()(i)));
    if (!(rate > 0.0)) throw NumericError("system has no dynamical time scale");
    return kTwoPi / rate;
}

double ObservableDeviation::relative() const {
    double r = 0.0;
    if (flux > 0.0) r = std::max(r, flux_scale > 0.0 ? flux / flux_scale : INFINITY);
    if (charge > 0.0) r = std::max(r, charge_scale > 0.0 ? charge / charge_scale : INFINITY);
    return r;
}

ObservableDeviation compare_observables(const StateTrajectory& a, const StateTrajectory& b) {
    if (a.t.size() != b.t.size()) throw std::invalid_argument("grid mismatch: different sample counts");
    for (std::size_t k = 0; k < a.t.size(); ++k)
        if (std::abs(a.t[k] - b.t[k]) > 1e-12 * std::max(std::abs(a.t[k]), 1e-300))
            throw std::invalid_argument("grid mismatch: sample times differ");
    if (a.Phi_J.cols() != b.Phi_J.cols() || a.Q_S.cols() != b.Q_S.cols())
        throw std::invalid_argument("grid mismatch: different observable counts");
    ObservableDeviation d;
    if (a.Phi_J.size()) {
        d.flux = (a.Phi_J - b.Phi_J).cwiseAbs().maxCoeff();
        d.flux_scale = a.Phi_J.cwiseAbs().maxCoeff();
    }
    if (a.Q_S.size()) {
        d.charge = (a.Q_S - b.Q_S).cwiseAbs().maxCoeff();
        d.charge_scale = a.Q_S.cwiseAbs().maxCoeff();
    }
    return d;
}

ClassicalState transform_state(const ClassicalState& s, const UnimodularTransform& U, const UnimodularTransform& W) {
    Mat Ui = to_real(U.M_inv).transpose(), Wi = to_real(W.M_inv).transpose();
    return {Ui * s.Phi, Wi * s.Q, Ui * s.Phi_dot, Wi * s.Q_dot};
}

ClassicalState restrict_state(const ClassicalState& s, const std::vector<std::size_t>& nodes,
                              const std::vector<std::size_t>& loops) {
    return {select(s.Phi, nodes), select(s.Q, loops), select(s.Phi_dot, nodes), select(s.Q_dot, loops)};
}

}  // namespace scnet
