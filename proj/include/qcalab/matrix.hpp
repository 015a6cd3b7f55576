#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "qcalab/scalar.hpp"

namespace qcalab {

// Dense row-major matrix over one field. All arithmetic is exact.
class Mat {
public:
    Mat() : rows_(0), cols_(0), field_(FieldTag::rationals()) {}
    Mat(int rows, int cols, FieldTag field)
        : rows_(rows), cols_(cols), field_(field),
          a_(static_cast<std::size_t>(rows) * cols, Scalar::zero(field)) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix shape");
    }

    static Mat identity(int n, FieldTag field) {
        Mat m(n, n, field);
        for (int i = 0; i < n; ++i) m.at(i, i) = Scalar::one(field);
        return m;
    }
    static Mat zeros(int rows, int cols, FieldTag field) { return Mat(rows, cols, field); }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    FieldTag field() const { return field_; }

    Scalar& at(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
    const Scalar& at(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

    bool operator==(const Mat& b) const {
        return rows_ == b.rows_ && cols_ == b.cols_ && field_ == b.field_ && a_ == b.a_;
    }
    bool operator!=(const Mat& b) const { return !(*this == b); }

    bool is_zero() const {
        for (const auto& s : a_)
            if (!s.is_zero()) return false;
        return true;
    }
    bool is_identity() const {
        if (rows_ != cols_) return false;
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j)
                if (i == j ? !at(i, j).is_one() : !at(i, j).is_zero()) return false;
        return true;
    }

    friend Mat operator+(const Mat& a, const Mat& b) {
        a.check_shape(b);
        Mat c = a;
        for (std::size_t k = 0; k < c.a_.size(); ++k) c.a_[k] += b.a_[k];
        return c;
    }
    friend Mat operator-(const Mat& a, const Mat& b) {
        a.check_shape(b);
        Mat c = a;
        for (std::size_t k = 0; k < c.a_.size(); ++k) c.a_[k] -= b.a_[k];
        return c;
    }
    friend Mat operator*(const Scalar& s, const Mat& a) {
        Mat c = a;
        for (auto& x : c.a_) x *= s;
        return c;
    }

    // Skips zero entries of the left factor, which makes products of
    // matrix-unit-like operands near linear time.
    friend Mat operator*(const Mat& a, const Mat& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product shape mismatch");
        if (a.field_ != b.field_) throw std::invalid_argument("mixed field tags in product");
        Mat c(a.rows_, b.cols_, a.field_);
        for (int i = 0; i < a.rows_; ++i) {
            for (int k = 0; k < a.cols_; ++k) {
                const Scalar& aik = a.at(i, k);
                if (aik.is_zero()) continue;
                for (int j = 0; j < b.cols_; ++j) {
                    const Scalar& bkj = b.at(k, j);
                    if (bkj.is_zero()) continue;
                    c.at(i, j) += aik * bkj;
                }
            }
        }
        return c;
    }

    Mat transpose() const {
        Mat t(cols_, rows_, field_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
        return t;
    }

private:
    void check_shape(const Mat& b) const {
        if (rows_ != b.rows_ || cols_ != b.cols_) throw std::invalid_argument("shape mismatch");
        if (field_ != b.field_) throw std::invalid_argument("mixed field tags");
    }

    int rows_, cols_;
    FieldTag field_;
    std::vector<Scalar> a_;
};

// Kronecker product (a_ij * B) blocks, the left factor indexing the
// slower axis.
inline Mat kron(const Mat& a, const Mat& b) {
    if (a.field() != b.field()) throw std::invalid_argument("mixed field tags in kron");
    Mat c(a.rows() * b.rows(), a.cols() * b.cols(), a.field());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            const Scalar& aij = a.at(i, j);
            if (aij.is_zero()) continue;
            for (int k = 0; k < b.rows(); ++k)
                for (int l = 0; l < b.cols(); ++l) {
                    const Scalar& bkl = b.at(k, l);
                    if (bkl.is_zero()) continue;
                    c.at(i * b.rows() + k, j * b.cols() + l) = aij * bkl;
                }
        }
    return c;
}

// Reduced row-echelon form: unit pivots, pivot columns cleared. Returns
// (rank, reduced). The reduced form is the canonical representative of
// the row space.
inline std::pair<int, Mat> rref(Mat m) {
    int rank = 0;
    for (int col = 0; col < m.cols() && rank < m.rows(); ++col) {
        int pivot = -1;
        for (int r = rank; r < m.rows(); ++r)
            if (!m.at(r, col).is_zero()) { pivot = r; break; }
        if (pivot < 0) continue;
        if (pivot != rank)
            for (int j = 0; j < m.cols(); ++j) std::swap(m.at(pivot, j), m.at(rank, j));
        Scalar inv = m.at(rank, col).inverse();
        for (int j = col; j < m.cols(); ++j) m.at(rank, j) *= inv;
        for (int r = 0; r < m.rows(); ++r) {
            if (r == rank) continue;
            Scalar f = m.at(r, col);
            if (f.is_zero()) continue;
            for (int j = col; j < m.cols(); ++j) m.at(r, j) -= f * m.at(rank, j);
        }
        ++rank;
    }
    return {rank, std::move(m)};
}

inline int rank_of(const Mat& m) { return rref(m).first; }

namespace detail {

// Bareiss fraction-free elimination over the integers.
inline Integer bareiss_det(std::vector<std::vector<Integer>> m) {
    const int n = static_cast<int>(m.size());
    if (n == 0) return 1;
    Integer prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (m[k][k] == 0) {
            int pivot = -1;
            for (int r = k + 1; r < n; ++r)
                if (m[r][k] != 0) { pivot = r; break; }
            if (pivot < 0) return 0;
            std::swap(m[k], m[pivot]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j) {
                Integer t = m[i][j] * m[k][k] - m[i][k] * m[k][j];
                m[i][j] = t / prev;  // exact division, Bareiss invariant
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    return sign > 0 ? m[n - 1][n - 1] : Integer(-m[n - 1][n - 1]);
}

}  // namespace detail

// Exact determinant. Over Q the matrix is row-scaled to integers and
// eliminated fraction-free (Bareiss), so intermediates stay integral;
// over F_p plain elimination is used.
inline Scalar det_ff(const Mat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("determinant of non-square matrix");
    const int n = m.rows();
    if (n == 0) return Scalar::one(m.field());
    if (m.field().is_rational()) {
        std::vector<std::vector<Integer>> im(n, std::vector<Integer>(n));
        Rational scale = 1;
        for (int i = 0; i < n; ++i) {
            Integer row_lcm = 1;
            for (int j = 0; j < n; ++j) {
                const Rational& r = m.at(i, j).rational_value();
                row_lcm = boost::multiprecision::lcm(row_lcm,
                                                     boost::multiprecision::denominator(r));
            }
            scale *= Rational(row_lcm);
            for (int j = 0; j < n; ++j) {
                Rational v = m.at(i, j).rational_value() * Rational(row_lcm);
                im[i][j] = boost::multiprecision::numerator(v);
            }
        }
        Integer d = detail::bareiss_det(std::move(im));
        return Scalar::rational(Rational(d) / scale);
    }
    Mat w = m;
    Scalar det = Scalar::one(m.field());
    for (int k = 0; k < n; ++k) {
        int pivot = -1;
        for (int r = k; r < n; ++r)
            if (!w.at(r, k).is_zero()) { pivot = r; break; }
        if (pivot < 0) return Scalar::zero(m.field());
        if (pivot != k) {
            for (int j = 0; j < n; ++j) std::swap(w.at(pivot, j), w.at(k, j));
            det = -det;
        }
        det *= w.at(k, k);
        Scalar inv = w.at(k, k).inverse();
        for (int r = k + 1; r < n; ++r) {
            Scalar f = w.at(r, k) * inv;
            if (f.is_zero()) continue;
            for (int j = k; j < n; ++j) w.at(r, j) -= f * w.at(k, j);
        }
    }
    return det;
}

// Inverse via Gauss-Jordan on [M | I]; throws on singular input.
inline Mat inverse(const Mat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("inverse of non-square matrix");
    const int n = m.rows();
    Mat aug(n, 2 * n, m.field());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) aug.at(i, j) = m.at(i, j);
        aug.at(i, n + i) = Scalar::one(m.field());
    }
    auto [rank, red] = rref(std::move(aug));
    if (rank < n) throw std::domain_error("singular matrix");
    Mat inv(n, n, m.field());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) inv.at(i, j) = red.at(i, n + j);
    return inv;
}

inline bool is_invertible(const Mat& m) {
    return m.rows() == m.cols() && !det_ff(m).is_zero();
}

// Basis of the right nullspace {x : Mx = 0}, one solution per row.
inline Mat nullspace(const Mat& m) {
    auto [rank, red] = rref(m);
    std::vector<int> pivot_col_of_row(rank, -1);
    std::vector<bool> is_pivot(m.cols(), false);
    for (int r = 0; r < rank; ++r) {
        for (int c = 0; c < m.cols(); ++c)
            if (!red.at(r, c).is_zero()) {
                pivot_col_of_row[r] = c;
                is_pivot[c] = true;
                break;
            }
    }
    Mat basis(m.cols() - rank, m.cols(), m.field());
    int row = 0;
    for (int free_col = 0; free_col < m.cols(); ++free_col) {
        if (is_pivot[free_col]) continue;
        basis.at(row, free_col) = Scalar::one(m.field());
        for (int r = 0; r < rank; ++r)
            basis.at(row, pivot_col_of_row[r]) = -red.at(r, free_col);
        ++row;
    }
    return basis;
}

// Solves M x = b for each column of b; returns (solvable, solution).
inline std::pair<bool, Mat> solve(const Mat& m, const Mat& b) {
    if (m.rows() != b.rows()) throw std::invalid_argument("solve shape mismatch");
    Mat aug(m.rows(), m.cols() + b.cols(), m.field());
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) aug.at(i, j) = m.at(i, j);
        for (int j = 0; j < b.cols(); ++j) aug.at(i, m.cols() + j) = b.at(i, j);
    }
    auto [rank, red] = rref(std::move(aug));
    Mat x(m.cols(), b.cols(), m.field());
    for (int r = 0; r < rank; ++r) {
        int pc = -1;
        for (int c = 0; c < m.cols(); ++c)
            if (!red.at(r, c).is_zero()) { pc = c; break; }
        if (pc < 0) {
            for (int j = 0; j < b.cols(); ++j)
                if (!red.at(r, m.cols() + j).is_zero()) return {false, Mat()};
            continue;
        }
        for (int j = 0; j < b.cols(); ++j) x.at(pc, j) = red.at(r, m.cols() + j);
    }
    return {true, std::move(x)};
}

}  // namespace qcalab
