#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace scnet {

/// Raised when checked 64-bit integer arithmetic would wrap.
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

std::int64_t checked_add(std::int64_t a, std::int64_t b);
std::int64_t checked_mul(std::int64_t a, std::int64_t b);

/// Dense row-major integer matrix with overflow-checked arithmetic.
class IntMatrix {
public:
    IntMatrix() = default;
    IntMatrix(std::size_t rows, std::size_t cols, std::int64_t fill = 0);
    IntMatrix(std::initializer_list<std::initializer_list<std::int64_t>> rows);

    static IntMatrix identity(std::size_t n);
    static IntMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows,
                               std::size_t cols_if_empty = 0);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    std::int64_t& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    std::int64_t operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    IntMatrix transpose() const;
    IntMatrix operator*(const IntMatrix& other) const;
    std::vector<std::int64_t> operator*(const std::vector<std::int64_t>& v) const;
    bool operator==(const IntMatrix& other) const;
    bool operator!=(const IntMatrix& other) const { return !(*this == other); }

    IntMatrix submatrix(const std::vector<std::size_t>& rows,
                        const std::vector<std::size_t>& cols) const;
    IntMatrix row_block(std::size_t first, std::size_t count) const;
    IntMatrix col_block(std::size_t first, std::size_t count) const;

    void add_row_multiple(std::size_t target, std::size_t source, std::int64_t factor);
    void add_col_multiple(std::size_t target, std::size_t source, std::int64_t factor);
    void swap_rows(std::size_t a, std::size_t b);
    void swap_cols(std::size_t a, std::size_t b);
    void negate_row(std::size_t i);
    void negate_col(std::size_t j);

    bool is_zero_row(std::size_t i) const;
    bool is_zero_col(std::size_t j) const;
    bool entries_in_unit_range() const;
    std::int64_t max_abs() const;

    std::vector<std::vector<std::int64_t>> to_rows() const;
    std::string str() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::int64_t> data_;
};

/// Invertible integer matrix paired with its exact integer inverse.
struct UnimodularTransform {
    IntMatrix M;
    IntMatrix M_inv;

    static UnimodularTransform identity(std::size_t n);
    static UnimodularTransform from_matrix(const IntMatrix& m);

    std::size_t size() const { return M.rows(); }
    /// Composition: apply `this` first, then `next` (result = next * this).
    UnimodularTransform then(const UnimodularTransform& next) const;
    UnimodularTransform inverse() const { return {M_inv, M}; }
    bool consistent() const;
};

/// Exact determinant via fraction-free (Bareiss) elimination.
std::int64_t determinant(const IntMatrix& m);

/// Rank via fraction-free elimination over 64-bit integers.
std::size_t integer_rank(const IntMatrix& m);

IntMatrix invert_unimodular(const IntMatrix& m);

struct IdentityBlockReduction {
    UnimodularTransform U;
    UnimodularTransform W;
    std::size_t rank = 0;
};

/// Finds unimodular U, W with U*omega*W^T = [[I_k, 0], [0, 0]].
IdentityBlockReduction reduce_to_identity_block(const IntMatrix& omega);

struct PivotResult {
    IntMatrix matrix;
    UnimodularTransform transform;
};

/// Uses row i to eliminate every other nonzero of column j; result = U*M.
PivotResult row_pivot(const IntMatrix& m, std::size_t i, std::size_t j);
/// Uses column j to eliminate every other nonzero of row i; result = M*W^T.
PivotResult col_pivot(const IntMatrix& m, std::size_t i, std::size_t j);

/// Row echelon form by unimodular row operations: result = U*M, zero rows last.
struct EchelonResult {
    IntMatrix matrix;
    UnimodularTransform U;
    std::size_t rank = 0;
};
EchelonResult row_echelon(const IntMatrix& m);

bool check_tu_exhaustive(const IntMatrix& m);
bool check_tu_sampled(const IntMatrix& m, std::size_t trials, std::uint64_t seed);
/// Exhaustive when rows+cols <= 12, sampled otherwise.
bool check_tu(const IntMatrix& m, std::size_t trials = 2000, std::uint64_t seed = 1);

}  // namespace scnet
