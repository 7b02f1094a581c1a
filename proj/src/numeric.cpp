#include "scnet/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scnet {

bool cholesky_pd_check(const Mat& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    const Eigen::Index n = m.rows();
    if (n == 0) return true;
    if (!m.allFinite()) return false;
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * m.cwiseAbs().maxCoeff()) return false;
    double maxdiag = m.diagonal().maxCoeff();
    if (!(maxdiag > 0)) return false;
    Mat l = Mat::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = m(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > rel_tol * maxdiag)) return false;
        l(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return true;
}

JacobiResult jacobi_eigen(const Mat& input, double tol, int max_sweeps) {
    const Eigen::Index n = input.rows();
    Mat a = symmetrize(input);
    Mat v = Mat::Identity(n, n);
    JacobiResult out;
    double scale = a.cwiseAbs().maxCoeff();
    for (int sweep = 0; sweep < max_sweeps && scale > 0; ++sweep) {
        double off = 0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        out.sweeps = sweep;
        if (std::sqrt(off) <= tol * scale) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::Index lead = 0;
        for (Eigen::Index k = 0; k < n; ++k)
            if (std::abs(v(k, j)) > 1e-12) { lead = k; break; }
        if (v(lead, j) < 0) v.col(j) *= -1.0;
    }
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    Vec diag = a.diagonal();
    double tie = 1e-12 * std::max(1.0, diag.cwiseAbs().maxCoeff());
    std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        if (std::abs(diag(x) - diag(y)) > tie) return diag(x) < diag(y);
        for (Eigen::Index k = 0; k < n; ++k) {
            if (std::abs(v(k, x) - v(k, y)) > 1e-12) return v(k, x) > v(k, y);
        }
        return x < y;
    });
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out.values(j) = diag(order[j]);
        out.vectors.col(j) = v.col(order[j]);
    }
    return out;
}

Mat select(const Mat& m, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
    Mat s(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) s(i, j) = m(rows[i], cols[j]);
    return s;
}

Vec select(const Vec& v, const std::vector<std::size_t>& idx) {
    Vec s(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) s(i) = v(idx[i]);
    return s;
}

std::vector<std::size_t> complement(const std::vector<std::size_t>& idx, std::size_t n) {
    std::vector<bool> used(n, false);
    for (auto i : idx) used.at(i) = true;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
        if (!used[i]) out.push_back(i);
    return out;
}

Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

Mat spd_inverse(const Mat& m) {
    if (m.rows() == 0) return m;
    if (!cholesky_pd_check(m)) throw NumericError("matrix is not symmetric positive definite");
    if (m.rows() == 1) return Mat::Constant(1, 1, 1.0 / m(0, 0));
    Eigen::LLT<Mat> llt(symmetrize(m));
    return symmetrize(llt.solve(Mat::Identity(m.rows(), m.cols())));
}

Mat schur_complement(const Mat& m, const std::vector<std::size_t>& retained) {
    auto removed = complement(retained, static_cast<std::size_t>(m.rows()));
    Mat mrr = select(m, retained, retained);
    if (removed.empty()) return mrr;
    Mat mra = select(m, retained, removed);
    Mat maa = select(m, removed, removed);
    Eigen::LLT<Mat> llt(symmetrize(maa));
    if (llt.info() != Eigen::Success) throw NumericError("schur_complement: eliminated block is singular");
    return symmetrize(mrr - mra * llt.solve(mra.transpose()));
}

SimultaneousDiagonalization simultaneous_diagonalize(const Mat& C, const Mat& L) {
    if (C.rows() != L.rows()) throw std::invalid_argument("simultaneous_diagonalize: dimension mismatch");
    if (!cholesky_pd_check(C) || !cholesky_pd_check(L))
        throw NumericError("simultaneous_diagonalize: C and L must be positive definite");
    const Eigen::Index n = C.rows();
    SimultaneousDiagonalization out;
    if (n == 0) {
        out.X = Mat(0, 0);
        out.C_d = out.L_d = out.omega2 = Vec(0);
        return out;
    }
    // C = M^T M, L^{-1} = N^T N
    Eigen::LLT<Mat> cl(symmetrize(C));
    Mat M = cl.matrixU();
    Mat Linv = spd_inverse(L);
    Mat Minv = M.triangularView<Eigen::Upper>().solve(Mat::Identity(n, n));
    Mat K = symmetrize(Minv.transpose() * Linv * Minv);
    JacobiResult eig = jacobi_eigen(K);
    // mode scale: diag(X^T C X) equals diag(C)
    Mat X = Minv * eig.vectors;
    out.omega2 = eig.values;
    out.C_d = (X.transpose() * C * X).diagonal();
    for (Eigen::Index i = 0; i < n; ++i) {
        double target = C(i, i);
        double s = std::sqrt(target / out.C_d(i));
        X.col(i) *= s;
    }
    out.X = X;
    out.C_d = (X.transpose() * C * X).diagonal();
    out.L_d.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) out.L_d(i) = 1.0 / (out.C_d(i) * out.omega2(i));
    return out;
}

double relative_difference(const Mat& a, const Mat& b) {
    double scale = std::max(a.norm(), b.norm());
    if (scale == 0) return 0;
    return (a - b).norm() / scale;
}

}  // namespace scnet
