#include "scnet/extract.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "scnet/errors.hpp"

namespace scnet {

namespace {

constexpr double kGolden = 0.6180339887498949;

std::vector<std::string> numbered_labels(const std::string& prefix, std::size_t n) {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(prefix + std::to_string(i + 1));
    return v;
}

double fro(const CMat& m) { return m.size() ? m.norm() : 0.0; }

/// Largest-magnitude entry of (R_C, R_L) made positive.
void sign_normalize(Vec& rc, Vec& rl) {
    double best = 0.0;
    int sign = 1;
    for (Eigen::Index i = 0; i < rc.size(); ++i)
        if (std::abs(rc(i)) > best) {
            best = std::abs(rc(i));
            sign = rc(i) < 0 ? -1 : 1;
        }
    for (Eigen::Index i = 0; i < rl.size(); ++i)
        if (std::abs(rl(i)) > best) {
            best = std::abs(rl(i));
            sign = rl(i) < 0 ? -1 : 1;
        }
    if (sign < 0) {
        rc = -rc;
        rl = -rl;
    }
}

/// Per-entry least-squares design for a fixed set of pole frequencies.
struct LinearFit {
    const HybridSamples& s;
    Mat Omega;  ///< C x L, real
    std::size_t C, L, K;

    LinearFit(const HybridSamples& samples, const IntMatrix& om)
        : s(samples), Omega(to_real(om)), C(samples.ports.C()), L(samples.ports.L()), K(samples.omega.size()) {}

    /// Solves min ‖y - X β‖ with column scaling; returns β and the relative residual.
    static std::pair<Vec, double> solve(const Mat& X, const Vec& y) {
        Vec scale(X.cols());
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            double m = X.col(j).cwiseAbs().maxCoeff();
            scale(j) = m > 0 ? m : 1.0;
        }
        Mat Xs = X * scale.cwiseInverse().asDiagonal();
        Vec b = Xs.colPivHouseholderQr().solve(y);
        Vec beta = b.cwiseQuotient(scale);
        double ny = y.norm();
        double r = (y - X * beta).norm();
        return {beta, ny > 0 ? r / ny : r};
    }

    /// Diagonal-block entry (i, j) of block `blk` (0 = CC, 1 = LL): y = Im H, basis (ω, ω³/(ω_r² - ω²)).
    std::pair<Vec, double> diag_entry(int blk, std::size_t i, std::size_t j, const std::vector<double>& poles) const {
        const std::size_t off = blk == 0 ? 0 : C;
        const std::size_t P = poles.size();
        const std::size_t rows = (i == j ? 1 : 2) * K;
        Mat X(rows, 1 + P);
        Vec y(rows);
        std::size_t r = 0;
        for (int pass = 0; pass < (i == j ? 1 : 2); ++pass) {
            std::size_t a = off + (pass ? j : i), b = off + (pass ? i : j);
            for (std::size_t k = 0; k < K; ++k, ++r) {
                double w = s.omega[k];
                y(r) = s.H[k](a, b).imag();
                X(r, 0) = w;
                for (std::size_t p = 0; p < P; ++p) X(r, 1 + p) = w * w * w / (poles[p] * poles[p] - w * w);
            }
        }
        return solve(X, y);
    }

    /// Off-diagonal coupling (i, j): upper block Re H + Ω and minus the lower block's transpose, basis ω²ω_r/(ω_r² - ω²).
    std::pair<Vec, double> cross_entry(std::size_t i, std::size_t j, const std::vector<double>& poles) const {
        const std::size_t P = poles.size();
        if (P == 0) {
            Vec y(2 * K);
            for (std::size_t k = 0; k < K; ++k) {
                y(k) = s.H[k](i, C + j).real() + Omega(i, j);
                y(K + k) = -(s.H[k](C + j, i).real() - Omega(i, j));
            }
            double ny = y.norm();
            return {Vec(0), ny};
        }
        Mat X(2 * K, P);
        Vec y(2 * K);
        for (std::size_t k = 0; k < K; ++k) {
            double w = s.omega[k];
            y(k) = s.H[k](i, C + j).real() + Omega(i, j);
            y(K + k) = -(s.H[k](C + j, i).real() - Omega(i, j));
            for (std::size_t p = 0; p < P; ++p) {
                double h = w * w * poles[p] / (poles[p] * poles[p] - w * w);
                X(k, p) = h;
                X(K + k, p) = h;
            }
        }
        double ny = y.norm();
        auto [beta, r] = solve(X, y);
        if (ny == 0.0) r = 0.0;
        return {beta, r};
    }

    double total_residual(const std::vector<double>& poles) const {
        double acc = 0.0;
        for (int blk = 0; blk < 2; ++blk) {
            std::size_t n = blk == 0 ? C : L;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i; j < n; ++j) {
                    double r = diag_entry(blk, i, j, poles).second;
                    acc += r * r;
                }
        }
        for (std::size_t i = 0; i < C; ++i)
            for (std::size_t j = 0; j < L; ++j) {
                auto [beta, r] = cross_entry(i, j, poles);
                if (!poles.empty()) acc += r * r;
            }
        return acc;
    }
};

double golden_minimize(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 300 && (b - a) > rel_tol * std::abs(b); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kGolden * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kGolden * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? c : d;
}

void check_on_pole(const std::vector<double>& omega, const std::vector<double>& poles) {
    for (double p : poles)
        for (double w : omega)
            if (std::abs(w - p) <= 1e-12 * p)
                throw DomainViolation("sample at " + std::to_string(w) + " rad/s lies on a pole");
}

}  // namespace

PortSet PortSet::numbered(std::size_t c, std::size_t l) { return {numbered_labels("C", c), numbered_labels("L", l)}; }

void HybridSamples::check() const {
    const auto N = static_cast<Eigen::Index>(ports.size());
    if (omega.size() != H.size()) throw std::invalid_argument("dimension mismatch: frequency and sample counts differ");
    for (std::size_t k = 0; k < H.size(); ++k) {
        if (H[k].rows() != N || H[k].cols() != N)
            throw std::invalid_argument("dimension mismatch: sample matrix does not match the port count");
        if (!(omega[k] >= 0.0) || !std::isfinite(omega[k])) throw DomainViolation("frequencies must be non-negative");
        if (k && !(omega[k] > omega[k - 1])) throw DomainViolation("frequencies must be strictly increasing");
        if (!H[k].allFinite())
            throw DomainViolation("non-finite response at " + std::to_string(omega[k]) + " rad/s (sample on a pole)");
    }
}

void PoleResidueModel::check() const {
    const auto c = static_cast<Eigen::Index>(ports.C()), l = static_cast<Eigen::Index>(ports.L());
    if (Omega_E.rows() != ports.C() || Omega_E.cols() != ports.L() || K_CC.rows() != c || K_CC.cols() != c ||
        K_LL.rows() != l || K_LL.cols() != l)
        throw std::invalid_argument("dimension mismatch: pole-residue model blocks do not match the ports");
    if (!Omega_E.entries_in_unit_range()) throw DomainViolation("Omega_E entries must lie in {-1, 0, 1}");
    if (c && !cholesky_pd_check(symmetrize(K_CC))) throw DomainViolation("K_CC is not positive definite");
    if (l && !cholesky_pd_check(symmetrize(K_LL))) throw DomainViolation("K_LL is not positive definite");
    for (const Pole& p : poles) {
        if (!(p.omega > 0.0) || !std::isfinite(p.omega)) throw DomainViolation("pole frequencies must be positive");
        if (p.R_C.size() != c || p.R_L.size() != l)
            throw std::invalid_argument("dimension mismatch: residue vector length");
    }
}

CircuitTopology SynthesizedCircuit::topology() const {
    const std::size_t n = static_cast<std::size_t>(C.rows()), l = static_cast<std::size_t>(L.rows());
    CircuitTopology t = make_topology(C, L, IntMatrix(n, 0), IntMatrix(l, 0), Omega);
    t.node_labels = ports.c_labels;
    t.loop_labels = ports.l_labels;
    for (std::size_t r = 0; r < resonators; ++r) {
        t.node_labels.push_back("res" + std::to_string(r + 1));
        t.loop_labels.push_back("res" + std::to_string(r + 1));
    }
    return t;
}

// ----------------------------------------------------------------------------
// Evaluation
// ----------------------------------------------------------------------------

CMat eval_hybrid(const PoleResidueModel& m, cplx s) {
    const auto c = static_cast<Eigen::Index>(m.ports.C()), l = static_cast<Eigen::Index>(m.ports.L());
    Mat Om = to_real(m.Omega_E);
    CMat H = CMat::Zero(c + l, c + l);
    H.topLeftCorner(c, c) = s * m.K_CC.cast<cplx>();
    H.bottomRightCorner(l, l) = s * m.K_LL.cast<cplx>();
    H.topRightCorner(c, l) = -Om.cast<cplx>();
    H.bottomLeftCorner(l, c) = Om.transpose().cast<cplx>();
    for (const Pole& p : m.poles) {
        cplx den = s * s + p.omega * p.omega;
        if (std::abs(den) <= 1e-14 * p.omega * p.omega)
            throw NumericError("evaluation at the pole " + std::to_string(p.omega) + " rad/s");
        cplx f = s * s / den;
        Mat cc = p.R_C * p.R_C.transpose(), ll = p.R_L * p.R_L.transpose(), cl = p.R_C * p.R_L.transpose();
        H.topLeftCorner(c, c) += (s - f * s) * cc.cast<cplx>();
        H.bottomRightCorner(l, l) += (s - f * s) * ll.cast<cplx>();
        H.topRightCorner(c, l) += -f * p.omega * cl.cast<cplx>();
        H.bottomLeftCorner(l, c) += f * p.omega * cl.transpose().cast<cplx>();
    }
    return H;
}

CMat eval_hybrid(const SynthesizedCircuit& ckt, cplx s) {
    const auto c = static_cast<Eigen::Index>(ckt.ports.C()), l = static_cast<Eigen::Index>(ckt.ports.L());
    const auto r = static_cast<Eigen::Index>(ckt.resonators);
    const Eigen::Index n = c + r, m = l + r, N = n + m;
    CMat M = CMat::Zero(N, N);
    Mat Om = to_real(ckt.Omega);
    M.topLeftCorner(n, n) = s * ckt.C.cast<cplx>();
    M.bottomRightCorner(m, m) = s * ckt.L.cast<cplx>();
    M.topRightCorner(n, m) = -Om.cast<cplx>();
    M.bottomLeftCorner(m, n) = Om.transpose().cast<cplx>();
    std::vector<Eigen::Index> ports, internal;
    for (Eigen::Index i = 0; i < c; ++i) ports.push_back(i);
    for (Eigen::Index i = 0; i < l; ++i) ports.push_back(n + i);
    for (Eigen::Index i = c; i < n; ++i) internal.push_back(i);
    for (Eigen::Index i = n + l; i < N; ++i) internal.push_back(i);
    auto pick = [&](const std::vector<Eigen::Index>& a, const std::vector<Eigen::Index>& b) {
        CMat out(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) out(Eigen::Index(i), Eigen::Index(j)) = M(a[i], b[j]);
        return out;
    };
    CMat H = pick(ports, ports);
    if (internal.empty()) return H;
    CMat Mii = pick(internal, internal);
    Eigen::FullPivLU<CMat> lu(Mii);
    if (!lu.isInvertible()) throw NumericError("evaluation at a resonator pole");
    for (Eigen::Index k = 0; k < r; ++k) {
        cplx den = s * s + ckt.omega_r(k) * ckt.omega_r(k);
        if (std::abs(den) <= 1e-14 * ckt.omega_r(k) * ckt.omega_r(k))
            throw NumericError("evaluation at the pole " + std::to_string(ckt.omega_r(k)) + " rad/s");
    }
    H -= pick(ports, internal) * lu.solve(pick(internal, ports));
    return H;
}

HybridSamples sample_hybrid(const SynthesizedCircuit& circuit, const std::vector<double>& omega) {
    HybridSamples hs;
    hs.ports = circuit.ports;
    hs.omega = omega;
    for (double w : omega) hs.H.push_back(eval_hybrid(circuit, cplx(0.0, w)));
    return hs;
}

HybridSamples sample_hybrid(const PoleResidueModel& model, const std::vector<double>& omega) {
    HybridSamples hs;
    hs.ports = model.ports;
    hs.omega = omega;
    for (double w : omega) hs.H.push_back(eval_hybrid(model, cplx(0.0, w)));
    return hs;
}

double hybrid_relative_error(const CMat& a, const CMat& b, std::size_t c_ports) {
    const auto c = static_cast<Eigen::Index>(c_ports), l = a.rows() - c;
    auto block = [&](Eigen::Index r0, Eigen::Index c0, Eigen::Index nr, Eigen::Index nc, double floor) {
        if (nr == 0 || nc == 0) return 0.0;
        double d = (a.block(r0, c0, nr, nc) - b.block(r0, c0, nr, nc)).norm();
        double s = std::max({a.block(r0, c0, nr, nc).norm(), b.block(r0, c0, nr, nc).norm(), floor});
        return s > 0 ? d / s : d;
    };
    const double tiny = std::numeric_limits<double>::min();
    return std::max({block(0, 0, c, c, tiny), block(c, c, l, l, tiny), block(0, c, c, l, 1.0), block(c, 0, l, c, 1.0)});
}

// ----------------------------------------------------------------------------
// Validation and zero frequency
// ----------------------------------------------------------------------------

LprReport check_lpr(const HybridSamples& samples, double tol) {
    samples.check();
    const auto c = static_cast<Eigen::Index>(samples.ports.C()), l = static_cast<Eigen::Index>(samples.ports.L());
    LprReport rep;
    rep.tolerance = tol;
    for (std::size_t k = 0; k < samples.H.size(); ++k) {
        const CMat& H = samples.H[k];
        LprSampleReport s;
        s.omega = samples.omega[k];
        double nh = fro(H);
        double scale = nh > 0 ? nh : 1.0;
        s.lossless_residual = fro(H + H.adjoint()) / scale;
        double sym = 0.0;
        if (c) sym += (H.topLeftCorner(c, c) - H.topLeftCorner(c, c).transpose()).squaredNorm();
        if (l) sym += (H.bottomRightCorner(l, l) - H.bottomRightCorner(l, l).transpose()).squaredNorm();
        if (c && l) sym += (H.bottomLeftCorner(l, c) + H.topRightCorner(c, l).transpose()).squaredNorm();
        s.symmetry_residual = std::sqrt(sym) / scale;
        rep.lossless = rep.lossless && s.lossless_residual <= tol;
        rep.reciprocal = rep.reciprocal && s.symmetry_residual <= tol;
        rep.samples.push_back(s);
    }
    return rep;
}

ZeroFrequencyResult extract_zero_freq(const HybridSamples& samples) {
    samples.check();
    if (samples.omega.size() < 2) throw DomainViolation("zero-frequency extraction needs at least two samples");
    const auto c = static_cast<Eigen::Index>(samples.ports.C()), l = static_cast<Eigen::Index>(samples.ports.L());
    const double w1 = samples.omega[0];
    ZeroFrequencyResult zr;

    const std::size_t even = std::min<std::size_t>(3, samples.omega.size());
    std::vector<double> lw(even, 1.0);
    for (std::size_t k = 0; k < even; ++k)
        for (std::size_t q = 0; q < even; ++q)
            if (q != k) {
                double xq = samples.omega[q] * samples.omega[q], xk = samples.omega[k] * samples.omega[k];
                lw[k] *= xq / (xq - xk);
            }
    /// Polynomial extrapolation in ω² to zero.
    auto at_zero_even = [&](bool upper) -> Mat {
        Mat acc = upper ? Mat::Zero(c, l) : Mat::Zero(l, c);
        for (std::size_t k = 0; k < even; ++k)
            acc += lw[k] * (upper ? samples.H[k].topRightCorner(c, l) : samples.H[k].bottomLeftCorner(l, c)).real();
        return acc;
    };
    Mat up = at_zero_even(true);
    Mat lo = at_zero_even(false);
    Mat est = 0.5 * (-up + lo.transpose());
    zr.H0_offdiag = up;
    zr.Omega_E = IntMatrix(samples.ports.C(), samples.ports.L());
    for (Eigen::Index i = 0; i < c; ++i)
        for (Eigen::Index j = 0; j < l; ++j) {
            double r = std::round(est(i, j));
            zr.rounding_residual = std::max(zr.rounding_residual, std::abs(est(i, j) - r));
            zr.Omega_E(std::size_t(i), std::size_t(j)) = static_cast<std::int64_t>(r);
        }

    const std::size_t used = std::min<std::size_t>(3, samples.omega.size());
    double dscale = 0.0, d0 = 0.0;
    for (int blk = 0; blk < 2; ++blk) {
        const Eigen::Index off = blk == 0 ? 0 : c, n = blk == 0 ? c : l;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                Mat X(static_cast<Eigen::Index>(used), used == 3 ? 3 : 2);
                Vec y(static_cast<Eigen::Index>(used));
                for (std::size_t k = 0; k < used; ++k) {
                    double w = samples.omega[k];
                    y(Eigen::Index(k)) = samples.H[k](off + i, off + j).imag();
                    dscale = std::max(dscale, std::abs(samples.H[k](off + i, off + j)));
                    X(Eigen::Index(k), 0) = 1.0;
                    X(Eigen::Index(k), 1) = w / samples.omega[used - 1];
                    if (used == 3) X(Eigen::Index(k), 2) = std::pow(w / samples.omega[used - 1], 3);
                }
                Vec beta = X.colPivHouseholderQr().solve(y);
                d0 = std::max(d0, std::abs(beta(0)));
                d0 = std::max(d0, std::abs(samples.H[0](off + i, off + j).real()) * (w1 == 0.0 ? 1.0 : 0.0));
            }
    }
    zr.diagonal_residual = dscale > 0 ? d0 / dscale : 0.0;

    if (zr.diagonal_residual > kZeroFreqDiagonalTol)
        throw DomainViolation("diagonal blocks of H(0) are not zero (zero-frequency pole); relative size " +
                              std::to_string(zr.diagonal_residual));
    if (zr.rounding_residual > kOmegaRoundingTol || !zr.Omega_E.entries_in_unit_range())
        throw DomainViolation(
            "off-diagonal block of H(0) is not an integer network matrix (ports do not follow a tree/cotree "
            "placement); rounding residual " +
            std::to_string(zr.rounding_residual));
    return zr;
}

IntMatrix extract_zero_freq(const PoleResidueModel& model) {
    model.check();
    return model.Omega_E;
}

// ----------------------------------------------------------------------------
// Residues
// ----------------------------------------------------------------------------

CMat residue_matrix(const std::vector<ResidueVectors>& vectors, double omega) {
    if (vectors.empty()) return CMat(0, 0);
    const auto c = vectors[0].R_C.size(), l = vectors[0].R_L.size();
    Mat A = Mat::Zero(c, c), E = Mat::Zero(l, l), B = Mat::Zero(c, l);
    for (const auto& v : vectors) {
        A += v.R_C * v.R_C.transpose();
        E += v.R_L * v.R_L.transpose();
        B += v.R_C * v.R_L.transpose();
    }
    const cplx I(0.0, 1.0);
    CMat K(c + l, c + l);
    K.topLeftCorner(c, c) = A.cast<cplx>();
    K.bottomRightCorner(l, l) = E.cast<cplx>();
    K.topRightCorner(c, l) = -I * B.cast<cplx>();
    K.bottomLeftCorner(l, c) = I * B.transpose().cast<cplx>();
    return 0.5 * omega * omega * K;
}

std::vector<ResidueVectors> decompose_residues(const CMat& K, double omega, std::size_t c_ports, double psd_tol) {
    if (K.rows() != K.cols() || std::size_t(K.rows()) < c_ports)
        throw std::invalid_argument("dimension mismatch: residue matrix");
    if (!(omega > 0.0)) throw DomainViolation("pole frequency must be positive");
    const auto c = static_cast<Eigen::Index>(c_ports), l = K.rows() - c;
    CMat G = 2.0 * K / (omega * omega);
    const double trace = std::max(G.diagonal().real().sum(), 0.0);
    if (trace == 0.0 && G.norm() == 0.0) return {};
    if ((G - G.adjoint()).norm() > 1e-8 * G.norm()) throw DomainViolation("residue matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (G + G.adjoint()), Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -psd_tol * trace)
        throw DomainViolation("residue matrix is not positive semi-definite (min eigenvalue " +
                              std::to_string(eig.eigenvalues().minCoeff() / trace) + " of the trace)");

    Mat A = 0.5 * (G.topLeftCorner(c, c).real() + G.topLeftCorner(c, c).real().transpose());
    Mat E = 0.5 * (G.bottomRightCorner(l, l).real() + G.bottomRightCorner(l, l).real().transpose());
    Mat B = 0.5 * (-G.topRightCorner(c, l).imag() + G.bottomLeftCorner(l, c).imag().transpose());

    const double rank_tol = 1e-12 * trace;
    auto factor = [&](const Mat& S, Mat& P, Mat& Pplus) {
        if (S.rows() == 0) {
            P = Mat(0, 0);
            Pplus = Mat(0, 0);
            return;
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(S);
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < S.rows(); ++i)
            if (es.eigenvalues()(i) > rank_tol) keep.push_back(i);
        P = Mat(S.rows(), Eigen::Index(keep.size()));
        Pplus = Mat(Eigen::Index(keep.size()), S.rows());
        for (std::size_t k = 0; k < keep.size(); ++k) {
            double s = std::sqrt(es.eigenvalues()(keep[k]));
            P.col(Eigen::Index(k)) = s * es.eigenvectors().col(keep[k]);
            Pplus.row(Eigen::Index(k)) = es.eigenvectors().col(keep[k]).transpose() / s;
        }
    };
    Mat P, Pp, Q, Qp;
    factor(A, P, Pp);
    factor(E, Q, Qp);
    const Eigen::Index a = P.cols(), b = Q.cols();
    std::vector<ResidueVectors> out;
    auto push = [&](Vec rc, Vec rl) {
        if (rc.squaredNorm() + rl.squaredNorm() <= 1e-9 * trace) return;
        out.push_back({std::move(rc), std::move(rl)});
    };
    if (a == 0 || b == 0) {
        if (b == 0 && B.norm() > 1e-6 * std::sqrt(trace * trace)) throw DomainViolation("residue coupling without support");
        for (Eigen::Index k = 0; k < a; ++k) push(P.col(k), Vec::Zero(l));
        for (Eigen::Index k = 0; k < b; ++k) push(Vec::Zero(c), Q.col(k));
        return out;
    }
    Mat M = Pp * B * Qp.transpose();
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec& d = svd.singularValues();
    const Mat& X = svd.matrixU();
    const Mat& Y = svd.matrixV();
    const Eigen::Index m = std::min(a, b);
    for (Eigen::Index k = 0; k < m; ++k)
        if (d(k) * d(k) > 1.0 + 1e-8)
            throw DomainViolation("residue coupling singular value squared " + std::to_string(d(k) * d(k)) +
                                  " exceeds 1");
    for (Eigen::Index k = 0; k < a; ++k) {
        double dk = k < m ? std::min(d(k), 1.0) : 0.0;
        Vec px = P * X.col(k);
        if (k < m) push(dk * px, Q * Y.col(k));
        push(std::sqrt(std::max(0.0, 1.0 - dk * dk)) * px, Vec::Zero(l));
    }
    for (Eigen::Index k = a; k < b; ++k) push(Vec::Zero(c), Q * Y.col(k));
    return out;
}

// ----------------------------------------------------------------------------
// Fitting and synthesis
// ----------------------------------------------------------------------------

FitResult fit_pole_residue(const HybridSamples& samples, const FitOptions& opts) {
    samples.check();
    const std::size_t P = opts.poles ? opts.poles->size() : opts.pole_count;
    if (samples.omega.size() < 4 * (P + 1))
        throw DomainViolation("fit needs at least " + std::to_string(4 * (P + 1)) + " samples");
    LprReport lpr = check_lpr(samples, 1e-6);
    if (!lpr.ok()) throw DomainViolation("samples are not lossless and reciprocal");

    FitResult res;
    res.zero_freq = extract_zero_freq(samples);
    LinearFit fit(samples, res.zero_freq.Omega_E);
    const std::size_t C = fit.C, L = fit.L, K = fit.K;

    std::vector<double> poles;
    if (opts.poles) {
        poles = *opts.poles;
        std::sort(poles.begin(), poles.end());
    } else if (P > 0) {
        std::vector<double> trace(K, 0.0), scale(C + L, 0.0);
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t i = 0; i < C + L; ++i)
                scale[i] = std::max(scale[i], std::abs(samples.H[k](Eigen::Index(i), Eigen::Index(i)).imag()));
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t i = 0; i < C + L; ++i)
                if (scale[i] > 0) trace[k] += samples.H[k](Eigen::Index(i), Eigen::Index(i)).imag() / scale[i];
        std::vector<std::pair<double, std::size_t>> drops;
        for (std::size_t k = 0; k + 1 < K; ++k)
            if (trace[k + 1] < trace[k]) drops.push_back({trace[k] - trace[k + 1], k});
        if (drops.size() < P)
            throw NumericError("located " + std::to_string(drops.size()) + " of " + std::to_string(P) + " poles");
        std::sort(drops.begin(), drops.end(), [](auto& x, auto& y) { return x.first > y.first; });
        drops.resize(P);
        std::sort(drops.begin(), drops.end(), [](auto& x, auto& y) { return x.second < y.second; });
        std::vector<std::pair<double, double>> brackets;
        for (auto& dk : drops) {
            brackets.push_back({samples.omega[dk.second], samples.omega[dk.second + 1]});
            poles.push_back(0.5 * (samples.omega[dk.second] + samples.omega[dk.second + 1]));
        }
        for (int sweep = 0; sweep < std::max(1, opts.refine_sweeps); ++sweep)
            for (std::size_t p = 0; p < P; ++p) {
                auto f = [&](double w) {
                    std::vector<double> trial = poles;
                    trial[p] = w;
                    return fit.total_residual(trial);
                };
                poles[p] = golden_minimize(f, brackets[p].first, brackets[p].second, 1e-14);
            }
    }
    check_on_pole(samples.omega, poles);

    PoleResidueModel& m = res.model;
    m.ports = samples.ports;
    m.Omega_E = res.zero_freq.Omega_E;
    Mat Ctot = Mat::Zero(Eigen::Index(C), Eigen::Index(C)), Ltot = Mat::Zero(Eigen::Index(L), Eigen::Index(L));
    std::vector<Mat> Ar(P, Mat::Zero(Eigen::Index(C), Eigen::Index(C))), Er(P, Mat::Zero(Eigen::Index(L), Eigen::Index(L))),
        Br(P, Mat::Zero(Eigen::Index(C), Eigen::Index(L)));
    for (int blk = 0; blk < 2; ++blk) {
        std::size_t n = blk == 0 ? C : L;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                Vec beta = fit.diag_entry(blk, i, j, poles).first;
                Mat& tot = blk == 0 ? Ctot : Ltot;
                tot(Eigen::Index(i), Eigen::Index(j)) = tot(Eigen::Index(j), Eigen::Index(i)) = beta(0);
                for (std::size_t p = 0; p < P; ++p) {
                    Mat& R = blk == 0 ? Ar[p] : Er[p];
                    R(Eigen::Index(i), Eigen::Index(j)) = R(Eigen::Index(j), Eigen::Index(i)) = beta(Eigen::Index(1 + p));
                }
            }
    }
    if (P)
        for (std::size_t i = 0; i < C; ++i)
            for (std::size_t j = 0; j < L; ++j) {
                Vec beta = fit.cross_entry(i, j, poles).first;
                for (std::size_t p = 0; p < P; ++p) Br[p](Eigen::Index(i), Eigen::Index(j)) = beta(Eigen::Index(p));
            }

    Mat Ksum = Mat::Zero(Eigen::Index(C), Eigen::Index(C)), Lsum = Mat::Zero(Eigen::Index(L), Eigen::Index(L));
    for (std::size_t p = 0; p < P; ++p) {
        std::vector<ResidueVectors> single{};
        const cplx I(0.0, 1.0);
        CMat G(Eigen::Index(C + L), Eigen::Index(C + L));
        G.topLeftCorner(Eigen::Index(C), Eigen::Index(C)) = Ar[p].cast<cplx>();
        G.bottomRightCorner(Eigen::Index(L), Eigen::Index(L)) = Er[p].cast<cplx>();
        G.topRightCorner(Eigen::Index(C), Eigen::Index(L)) = -I * Br[p].cast<cplx>();
        G.bottomLeftCorner(Eigen::Index(L), Eigen::Index(C)) = I * Br[p].transpose().cast<cplx>();
        CMat Kp = 0.5 * poles[p] * poles[p] * G;
        for (auto& v : decompose_residues(Kp, poles[p], C, opts.psd_tol)) {
            Ksum += v.R_C * v.R_C.transpose();
            Lsum += v.R_L * v.R_L.transpose();
            m.poles.push_back({poles[p], v.R_C, v.R_L});
        }
    }
    for (Pole& p : m.poles) sign_normalize(p.R_C, p.R_L);
    m.K_CC = symmetrize(Ctot - Ksum);
    m.K_LL = symmetrize(Ltot - Lsum);
    if (C && !cholesky_pd_check(m.K_CC)) throw DomainViolation("fitted K_CC is not positive definite");
    if (L && !cholesky_pd_check(m.K_LL)) throw DomainViolation("fitted K_LL is not positive definite");

    for (std::size_t k = 0; k < K; ++k)
        res.residual = std::max(
            res.residual, hybrid_relative_error(eval_hybrid(m, cplx(0.0, samples.omega[k])), samples.H[k], C));
    if (res.residual > opts.residual_tol)
        throw NumericError("fit residual " + std::to_string(res.residual) + " exceeds tolerance " +
                           std::to_string(opts.residual_tol));
    return res;
}

SynthesizedCircuit synthesize(const PoleResidueModel& model) {
    model.check();
    const auto c = static_cast<Eigen::Index>(model.ports.C()), l = static_cast<Eigen::Index>(model.ports.L());
    std::vector<Pole> poles;
    for (const Pole& p : model.poles)
        if (p.R_C.squaredNorm() + p.R_L.squaredNorm() > 0.0) poles.push_back(p);
    std::stable_sort(poles.begin(), poles.end(), [](const Pole& a, const Pole& b) { return a.omega < b.omega; });
    const auto r = static_cast<Eigen::Index>(poles.size());

    SynthesizedCircuit ckt;
    ckt.ports = model.ports;
    ckt.resonators = poles.size();
    ckt.C = Mat::Zero(c + r, c + r);
    ckt.L = Mat::Zero(l + r, l + r);
    ckt.C_rr = Vec(r);
    ckt.L_rr = Vec(r);
    ckt.omega_r = Vec(r);
    ckt.C.topLeftCorner(c, c) = model.K_CC;
    ckt.L.topLeftCorner(l, l) = model.K_LL;
    for (Eigen::Index k = 0; k < r; ++k) {
        Pole p = poles[std::size_t(k)];
        sign_normalize(p.R_C, p.R_L);
        const double w = p.omega;
        double crr = p.R_C.squaredNorm() > 0 ? p.R_C.squaredNorm() : 1.0 / (w * w * p.R_L.squaredNorm());
        double lrr = 1.0 / (w * w * crr);
        ckt.C_rr(k) = crr;
        ckt.L_rr(k) = lrr;
        ckt.omega_r(k) = w;
        ckt.C.topLeftCorner(c, c) += p.R_C * p.R_C.transpose();
        ckt.L.topLeftCorner(l, l) += p.R_L * p.R_L.transpose();
        ckt.C.block(0, c + k, c, 1) = std::sqrt(crr) * p.R_C;
        ckt.C.block(c + k, 0, 1, c) = std::sqrt(crr) * p.R_C.transpose();
        ckt.L.block(0, l + k, l, 1) = std::sqrt(lrr) * p.R_L;
        ckt.L.block(l + k, 0, 1, l) = std::sqrt(lrr) * p.R_L.transpose();
        ckt.C(c + k, c + k) = crr;
        ckt.L(l + k, l + k) = lrr;
    }
    ckt.C = symmetrize(ckt.C);
    ckt.L = symmetrize(ckt.L);
    if (!cholesky_pd_check(ckt.C)) throw NumericError("synthesized capacitance matrix is not positive definite");
    if (!cholesky_pd_check(ckt.L)) throw NumericError("synthesized inductance matrix is not positive definite");
    ckt.Omega = IntMatrix(std::size_t(c + r), std::size_t(l + r));
    for (std::size_t i = 0; i < model.ports.C(); ++i)
        for (std::size_t j = 0; j < model.ports.L(); ++j) ckt.Omega(i, j) = model.Omega_E(i, j);
    for (Eigen::Index k = 0; k < r; ++k) ckt.Omega(std::size_t(c + k), std::size_t(l + k)) = 1;
    return ckt;
}

// ----------------------------------------------------------------------------
// Reinsertion
// ----------------------------------------------------------------------------

CircuitTopology reinsert_elements(const SynthesizedCircuit& circuit, const std::vector<JunctionInsert>& junctions,
                                  const std::vector<SlipInsert>& slips, const std::vector<PortDrive>& drives) {
    CircuitTopology t = circuit.topology();
    const auto& cl = circuit.ports.c_labels;
    const auto& ll = circuit.ports.l_labels;
    auto find = [](const std::vector<std::string>& v, const std::string& s) -> std::ptrdiff_t {
        auto it = std::find(v.begin(), v.end(), s);
        return it == v.end() ? -1 : it - v.begin();
    };
    auto c_port = [&](const std::string& p, const char* what) {
        std::ptrdiff_t i = find(cl, p);
        if (i < 0) {
            if (find(ll, p) >= 0)
                throw DomainViolation(std::string(what) + " assigned to inductive port '" + p + "'");
            throw DomainViolation("unknown port '" + p + "'");
        }
        return std::size_t(i);
    };
    auto l_port = [&](const std::string& p, const char* what) {
        std::ptrdiff_t i = find(ll, p);
        if (i < 0) {
            if (find(cl, p) >= 0)
                throw DomainViolation(std::string(what) + " assigned to capacitive port '" + p + "'");
            throw DomainViolation("unknown port '" + p + "'");
        }
        return std::size_t(i);
    };

    const std::size_t n = t.n(), l = t.l();
    t.A_J = IntMatrix(n, junctions.size());
    t.E_J = Vec(Eigen::Index(junctions.size()));
    for (std::size_t k = 0; k < junctions.size(); ++k) {
        std::size_t i = c_port(junctions[k].port, "junction");
        t.A_J(i, k) = 1;
        t.E_J(Eigen::Index(k)) = junctions[k].E_J;
        t.C(Eigen::Index(i), Eigen::Index(i)) += junctions[k].extra_capacitance;
        t.junction_labels.push_back(junctions[k].label.empty() ? "J" + std::to_string(k + 1) : junctions[k].label);
    }
    t.B_S = IntMatrix(l, slips.size());
    t.E_S = Vec(Eigen::Index(slips.size()));
    for (std::size_t k = 0; k < slips.size(); ++k) {
        std::size_t i = l_port(slips[k].port, "phase slip");
        t.B_S(i, k) = 1;
        t.E_S(Eigen::Index(k)) = slips[k].E_S;
        t.L(Eigen::Index(i), Eigen::Index(i)) += slips[k].extra_inductance;
        t.slip_labels.push_back(slips[k].label.empty() ? "S" + std::to_string(k + 1) : slips[k].label);
    }
    t.phi_J_offset = Vec();
    t.q_S_offset = Vec();
    for (const PortDrive& d : drives) {
        bool cap = find(cl, d.port) >= 0;
        std::size_t idx = cap ? c_port(d.port, "drive") : l_port(d.port, "drive");
        if (d.times.size() != d.values.size() || d.times.empty())
            throw std::invalid_argument("drive on port '" + d.port + "' has mismatched series");
        TimeSeries& ts = cap ? t.q_drive : t.phi_drive;
        const auto width = static_cast<Eigen::Index>(cap ? n : l);
        if (ts.empty()) {
            ts.times = d.times;
            ts.values = Mat::Zero(Eigen::Index(d.times.size()), width);
        } else if (ts.times != d.times) {
            throw DomainViolation("drives of one kind must share a time grid");
        }
        for (std::size_t k = 0; k < d.times.size(); ++k) ts.values(Eigen::Index(k), Eigen::Index(idx)) += d.values[k];
    }
    t.normalize();
    t.check_dimensions();
    return t;
}

}  // namespace scnet
