#include "scnet/intlin.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>

namespace scnet {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("integer overflow in addition");
    return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("integer overflow in multiplication");
    return r;
}

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols, std::int64_t fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<std::int64_t>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw std::invalid_argument("ragged IntMatrix initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

IntMatrix IntMatrix::identity(std::size_t n) {
    IntMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<std::int64_t>>& rows,
                               std::size_t cols_if_empty) {
    std::size_t cols = rows.empty() ? cols_if_empty : rows.front().size();
    IntMatrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw std::invalid_argument("ragged integer matrix");
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

IntMatrix IntMatrix::transpose() const {
    IntMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

IntMatrix IntMatrix::operator*(const IntMatrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("IntMatrix product dimension mismatch");
    IntMatrix r(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) {
            std::int64_t a = (*this)(i, k);
            if (a == 0) continue;
            for (std::size_t j = 0; j < o.cols_; ++j)
                r(i, j) = checked_add(r(i, j), checked_mul(a, o(k, j)));
        }
    return r;
}

std::vector<std::int64_t> IntMatrix::operator*(const std::vector<std::int64_t>& v) const {
    if (v.size() != cols_) throw std::invalid_argument("IntMatrix-vector dimension mismatch");
    std::vector<std::int64_t> r(rows_, 0);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            r[i] = checked_add(r[i], checked_mul((*this)(i, j), v[j]));
    return r;
}

bool IntMatrix::operator==(const IntMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
}

IntMatrix IntMatrix::submatrix(const std::vector<std::size_t>& rs,
                               const std::vector<std::size_t>& cs) const {
    IntMatrix s(rs.size(), cs.size());
    for (std::size_t i = 0; i < rs.size(); ++i)
        for (std::size_t j = 0; j < cs.size(); ++j) s(i, j) = (*this)(rs[i], cs[j]);
    return s;
}

IntMatrix IntMatrix::row_block(std::size_t first, std::size_t count) const {
    IntMatrix s(count, cols_);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < cols_; ++j) s(i, j) = (*this)(first + i, j);
    return s;
}

IntMatrix IntMatrix::col_block(std::size_t first, std::size_t count) const {
    IntMatrix s(rows_, count);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < count; ++j) s(i, j) = (*this)(i, first + j);
    return s;
}

void IntMatrix::add_row_multiple(std::size_t target, std::size_t source, std::int64_t f) {
    if (f == 0) return;
    for (std::size_t j = 0; j < cols_; ++j)
        (*this)(target, j) = checked_add((*this)(target, j), checked_mul(f, (*this)(source, j)));
}

void IntMatrix::add_col_multiple(std::size_t target, std::size_t source, std::int64_t f) {
    if (f == 0) return;
    for (std::size_t i = 0; i < rows_; ++i)
        (*this)(i, target) = checked_add((*this)(i, target), checked_mul(f, (*this)(i, source)));
}

void IntMatrix::swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
}

void IntMatrix::swap_cols(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t i = 0; i < rows_; ++i) std::swap((*this)(i, a), (*this)(i, b));
}

void IntMatrix::negate_row(std::size_t i) {
    for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = checked_mul(-1, (*this)(i, j));
}

void IntMatrix::negate_col(std::size_t j) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = checked_mul(-1, (*this)(i, j));
}

bool IntMatrix::is_zero_row(std::size_t i) const {
    for (std::size_t j = 0; j < cols_; ++j)
        if ((*this)(i, j) != 0) return false;
    return true;
}

bool IntMatrix::is_zero_col(std::size_t j) const {
    for (std::size_t i = 0; i < rows_; ++i)
        if ((*this)(i, j) != 0) return false;
    return true;
}

bool IntMatrix::entries_in_unit_range() const {
    return std::all_of(data_.begin(), data_.end(), [](std::int64_t v) { return v >= -1 && v <= 1; });
}

std::int64_t IntMatrix::max_abs() const {
    std::int64_t m = 0;
    for (auto v : data_) m = std::max(m, v < 0 ? -v : v);
    return m;
}

std::vector<std::vector<std::int64_t>> IntMatrix::to_rows() const {
    std::vector<std::vector<std::int64_t>> r(rows_, std::vector<std::int64_t>(cols_));
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) r[i][j] = (*this)(i, j);
    return r;
}

std::string IntMatrix::str() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < rows_; ++i) {
        os << (i ? "," : "") << '[';
        for (std::size_t j = 0; j < cols_; ++j) os << (j ? "," : "") << (*this)(i, j);
        os << ']';
    }
    os << ']';
    return os.str();
}

// ---------------------------------------------------------------------------
// Unimodular transforms

UnimodularTransform UnimodularTransform::identity(std::size_t n) {
    return {IntMatrix::identity(n), IntMatrix::identity(n)};
}

UnimodularTransform UnimodularTransform::from_matrix(const IntMatrix& m) {
    return {m, invert_unimodular(m)};
}

UnimodularTransform UnimodularTransform::then(const UnimodularTransform& next) const {
    return {next.M * M, M_inv * next.M_inv};
}

bool UnimodularTransform::consistent() const {
    if (M.rows() != M.cols() || M_inv.rows() != M.rows() || M_inv.cols() != M.cols()) return false;
    return M * M_inv == IntMatrix::identity(M.rows());
}

namespace {

/// Accumulates elementary row operations together with their inverse.
struct Builder {
    IntMatrix M, Minv;
    explicit Builder(std::size_t n) : M(IntMatrix::identity(n)), Minv(IntMatrix::identity(n)) {}

    void add(std::size_t target, std::size_t source, std::int64_t f) {
        if (f == 0) return;
        M.add_row_multiple(target, source, f);
        Minv.add_col_multiple(source, target, -f);
    }
    void swap(std::size_t a, std::size_t b) {
        M.swap_rows(a, b);
        Minv.swap_cols(a, b);
    }
    void negate(std::size_t i) {
        M.negate_row(i);
        Minv.negate_col(i);
    }
    UnimodularTransform done() const { return {M, Minv}; }
};

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t abs64(std::int64_t v) { return v < 0 ? checked_mul(v, -1) : v; }

}  // namespace

std::int64_t determinant(const IntMatrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("determinant of non-square matrix");
    std::size_t n = m.rows();
    if (n == 0) return 1;
    IntMatrix a = m;
    std::int64_t sign = 1, prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a(k, k) == 0) {
            std::size_t p = k + 1;
            while (p < n && a(p, k) == 0) ++p;
            if (p == n) return 0;
            a.swap_rows(k, p);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) {
                __int128 v = static_cast<__int128>(a(i, j)) * a(k, k) -
                             static_cast<__int128>(a(i, k)) * a(k, j);
                v /= prev;
                if (v > std::numeric_limits<std::int64_t>::max() ||
                    v < std::numeric_limits<std::int64_t>::min())
                    throw OverflowError("integer overflow in determinant");
                a(i, j) = static_cast<std::int64_t>(v);
            }
        prev = a(k, k);
    }
    return checked_mul(sign, a(n - 1, n - 1));
}

std::size_t integer_rank(const IntMatrix& m) {
    IntMatrix a = m;
    std::size_t rank = 0;
    std::int64_t prev = 1;
    for (std::size_t c = 0; c < a.cols() && rank < a.rows(); ++c) {
        std::size_t p = rank;
        while (p < a.rows() && a(p, c) == 0) ++p;
        if (p == a.rows()) continue;
        a.swap_rows(rank, p);
        for (std::size_t i = rank + 1; i < a.rows(); ++i) {
            for (std::size_t j = c + 1; j < a.cols(); ++j) {
                __int128 v = static_cast<__int128>(a(i, j)) * a(rank, c) -
                             static_cast<__int128>(a(i, c)) * a(rank, j);
                v /= prev;
                if (v > std::numeric_limits<std::int64_t>::max() ||
                    v < std::numeric_limits<std::int64_t>::min())
                    throw OverflowError("integer overflow in rank computation");
                a(i, j) = static_cast<std::int64_t>(v);
            }
            a(i, c) = 0;
        }
        prev = a(rank, c);
        ++rank;
    }
    return rank;
}

EchelonResult row_echelon(const IntMatrix& m) {
    IntMatrix a = m;
    Builder U(m.rows());
    std::size_t r = 0;
    for (std::size_t c = 0; c < a.cols() && r < a.rows(); ++c) {
        while (true) {
            std::size_t best = a.rows();
            for (std::size_t i = r; i < a.rows(); ++i)
                if (a(i, c) != 0 && (best == a.rows() || abs64(a(i, c)) < abs64(a(best, c)))) best = i;
            if (best == a.rows()) break;
            a.swap_rows(r, best);
            U.swap(r, best);
            bool done = true;
            for (std::size_t i = r + 1; i < a.rows(); ++i) {
                if (a(i, c) == 0) continue;
                std::int64_t q = floor_div(a(i, c), a(r, c));
                a.add_row_multiple(i, r, -q);
                U.add(i, r, -q);
                if (a(i, c) != 0) done = false;
            }
            if (done) {
                if (a(r, c) < 0) {
                    a.negate_row(r);
                    U.negate(r);
                }
                ++r;
                break;
            }
        }
    }
    return {a, U.done(), r};
}

IntMatrix invert_unimodular(const IntMatrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("invert_unimodular: matrix is not square");
    std::int64_t d = determinant(m);
    if (d != 1 && d != -1)
        throw std::domain_error("invert_unimodular: determinant is " + std::to_string(d) + ", not +-1");
    std::size_t n = m.rows();
    IntMatrix a = m;
    Builder B(n);
    for (std::size_t c = 0; c < n; ++c) {
        while (true) {
            std::size_t best = n;
            for (std::size_t i = c; i < n; ++i)
                if (a(i, c) != 0 && (best == n || abs64(a(i, c)) < abs64(a(best, c)))) best = i;
            a.swap_rows(c, best);
            B.swap(c, best);
            bool done = true;
            for (std::size_t i = c + 1; i < n; ++i) {
                if (a(i, c) == 0) continue;
                std::int64_t q = floor_div(a(i, c), a(c, c));
                a.add_row_multiple(i, c, -q);
                B.add(i, c, -q);
                if (a(i, c) != 0) done = false;
            }
            if (done) break;
        }
        if (a(c, c) < 0) {
            a.negate_row(c);
            B.negate(c);
        }
    }
    for (std::size_t c = n; c-- > 0;)
        for (std::size_t i = 0; i < c; ++i) {
            std::int64_t f = a(i, c);
            if (f == 0) continue;
            a.add_row_multiple(i, c, -f);
            B.add(i, c, -f);
        }
    return B.M;
}

IdentityBlockReduction reduce_to_identity_block(const IntMatrix& omega) {
    IntMatrix a = omega;
    const std::size_t n = a.rows(), l = a.cols();
    Builder U(n), W(l);
    std::size_t t = 0;
    while (t < n && t < l) {
        std::size_t bi = n, bj = l;
        for (std::size_t i = t; i < n; ++i)
            for (std::size_t j = t; j < l; ++j)
                if (a(i, j) != 0 && (bi == n || abs64(a(i, j)) < abs64(a(bi, bj)))) {
                    bi = i;
                    bj = j;
                }
        if (bi == n) break;
        a.swap_rows(t, bi);
        U.swap(t, bi);
        a.swap_cols(t, bj);
        W.swap(t, bj);
        bool clean = false;
        while (!clean) {
            clean = true;
            for (std::size_t i = t + 1; i < n; ++i) {
                if (a(i, t) == 0) continue;
                std::int64_t q = floor_div(a(i, t), a(t, t));
                a.add_row_multiple(i, t, -q);
                U.add(i, t, -q);
                if (a(i, t) != 0) clean = false;
            }
            for (std::size_t j = t + 1; j < l; ++j) {
                if (a(t, j) == 0) continue;
                std::int64_t q = floor_div(a(t, j), a(t, t));
                a.add_col_multiple(j, t, -q);
                W.add(j, t, -q);
                if (a(t, j) != 0) clean = false;
            }
            if (!clean) {
                std::size_t bi2 = t, bj2 = t;
                for (std::size_t i = t; i < n; ++i)
                    if (a(i, t) != 0 && abs64(a(i, t)) < abs64(a(bi2, bj2))) { bi2 = i; bj2 = t; }
                for (std::size_t j = t; j < l; ++j)
                    if (a(t, j) != 0 && abs64(a(t, j)) < abs64(a(bi2, bj2))) { bi2 = t; bj2 = j; }
                a.swap_rows(t, bi2);
                U.swap(t, bi2);
                a.swap_cols(t, bj2);
                W.swap(t, bj2);
            }
        }
        if (abs64(a(t, t)) != 1)
            throw std::domain_error("reduce_to_identity_block: invariant factor " +
                                    std::to_string(abs64(a(t, t))) + " is not a unit");
        if (a(t, t) < 0) {
            a.negate_row(t);
            U.negate(t);
        }
        ++t;
    }
    return {U.done(), W.done(), t};
}

PivotResult row_pivot(const IntMatrix& m, std::size_t i, std::size_t j) {
    if (i >= m.rows() || j >= m.cols()) throw std::out_of_range("row_pivot: index out of range");
    std::int64_t p = m(i, j);
    if (p == 0) throw std::invalid_argument("row_pivot: pivot entry is zero");
    IntMatrix a = m;
    Builder U(m.rows());
    for (std::size_t k = 0; k < m.rows(); ++k) {
        if (k == i || a(k, j) == 0) continue;
        if (a(k, j) % p != 0) throw std::domain_error("row_pivot: non-unit pivot does not divide column");
        std::int64_t f = -a(k, j) / p;
        a.add_row_multiple(k, i, f);
        U.add(k, i, f);
    }
    return {a, U.done()};
}

PivotResult col_pivot(const IntMatrix& m, std::size_t i, std::size_t j) {
    if (i >= m.rows() || j >= m.cols()) throw std::out_of_range("col_pivot: index out of range");
    std::int64_t p = m(i, j);
    if (p == 0) throw std::invalid_argument("col_pivot: pivot entry is zero");
    IntMatrix a = m;
    Builder W(m.cols());
    for (std::size_t k = 0; k < m.cols(); ++k) {
        if (k == j || a(i, k) == 0) continue;
        if (a(i, k) % p != 0) throw std::domain_error("col_pivot: non-unit pivot does not divide row");
        std::int64_t f = -a(i, k) / p;
        a.add_col_multiple(k, j, f);
        W.add(k, j, f);
    }
    return {a, W.done()};
}

namespace {

bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
    std::size_t k = c.size();
    for (std::size_t i = k; i-- > 0;) {
        if (c[i] < n - k + i) {
            ++c[i];
            for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

}  // namespace

bool check_tu_exhaustive(const IntMatrix& m) {
    if (!m.entries_in_unit_range()) return false;
    std::size_t kmax = std::min(m.rows(), m.cols());
    for (std::size_t k = 2; k <= kmax; ++k) {
        std::vector<std::size_t> rs(k);
        for (std::size_t i = 0; i < k; ++i) rs[i] = i;
        do {
            std::vector<std::size_t> cs(k);
            for (std::size_t i = 0; i < k; ++i) cs[i] = i;
            do {
                std::int64_t d = determinant(m.submatrix(rs, cs));
                if (d < -1 || d > 1) return false;
            } while (next_combination(cs, m.cols()));
        } while (next_combination(rs, m.rows()));
    }
    return true;
}

bool check_tu_sampled(const IntMatrix& m, std::size_t trials, std::uint64_t seed) {
    if (!m.entries_in_unit_range()) return false;
    std::size_t kmax = std::min(m.rows(), m.cols());
    if (kmax < 2) return true;
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> rows(m.rows()), cols(m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = j;
    std::uniform_int_distribution<std::size_t> kd(2, kmax);
    for (std::size_t t = 0; t < trials; ++t) {
        std::size_t k = kd(rng);
        std::shuffle(rows.begin(), rows.end(), rng);
        std::shuffle(cols.begin(), cols.end(), rng);
        std::vector<std::size_t> rs(rows.begin(), rows.begin() + k), cs(cols.begin(), cols.begin() + k);
        std::int64_t d = determinant(m.submatrix(rs, cs));
        if (d < -1 || d > 1) return false;
    }
    return true;
}

bool check_tu(const IntMatrix& m, std::size_t trials, std::uint64_t seed) {
    if (m.rows() + m.cols() <= 12) return check_tu_exhaustive(m);
    return check_tu_sampled(m, trials, seed);
}

}  // namespace scnet
