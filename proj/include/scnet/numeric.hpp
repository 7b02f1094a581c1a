#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace scnet {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Cholesky succeeds with every pivot above 1e-14 times the largest diagonal entry.
bool cholesky_pd_check(const Mat& m, double rel_tol = 1e-14);

/// Symmetric eigen-decomposition by cyclic Jacobi rotations, eigenvalues ascending.
struct JacobiResult {
    Vec values;
    Mat vectors;
    int sweeps = 0;
};
JacobiResult jacobi_eigen(const Mat& a, double tol = 1e-15, int max_sweeps = 100);

/// M_rr - M_ra M_aa^{-1} M_ar for the retained index set r.
Mat schur_complement(const Mat& m, const std::vector<std::size_t>& retained);

Mat select(const Mat& m, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols);
Vec select(const Vec& v, const std::vector<std::size_t>& idx);
std::vector<std::size_t> complement(const std::vector<std::size_t>& idx, std::size_t n);

Mat symmetrize(const Mat& m);
/// Inverse of a symmetric positive definite matrix; throws NumericError otherwise.
Mat spd_inverse(const Mat& m);

struct SimultaneousDiagonalization {
    Mat X;          ///< columns are mode vectors
    Vec C_d;        ///< X^T C X diagonal
    Vec L_d;        ///< (C_d * omega2)^{-1}
    Vec omega2;     ///< squared mode frequencies, ascending
};

/// X^T C X = diag(C_d), X^T L^{-1} X = diag(C_d * omega2).
SimultaneousDiagonalization simultaneous_diagonalize(const Mat& C, const Mat& L);

double relative_difference(const Mat& a, const Mat& b);

}  // namespace scnet
