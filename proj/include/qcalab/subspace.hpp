#pragma once

#include <utility>
#include <vector>

#include "qcalab/matrix.hpp"

namespace qcalab {

// A linear subspace of k^D held as its reduced row-echelon basis, so two
// equal subspaces have identical basis matrices.
class Subspace {
public:
    Subspace() = default;
    Subspace(int ambient, FieldTag field)
        : ambient_(ambient), basis_(0, ambient, field) {}

    // Rows of `vectors` span the subspace.
    static Subspace span(const Mat& vectors) {
        auto [rank, red] = rref(vectors);
        Subspace s(vectors.cols(), vectors.field());
        Mat basis(rank, vectors.cols(), vectors.field());
        for (int i = 0; i < rank; ++i)
            for (int j = 0; j < vectors.cols(); ++j) basis.at(i, j) = red.at(i, j);
        s.basis_ = std::move(basis);
        return s;
    }

    int ambient_dim() const { return ambient_; }
    int dim() const { return basis_.rows(); }
    const Mat& basis() const { return basis_; }
    FieldTag field() const { return basis_.field(); }

    bool operator==(const Subspace& o) const {
        return ambient_ == o.ambient_ && basis_ == o.basis_;
    }
    bool operator!=(const Subspace& o) const { return !(*this == o); }

    bool contains(const Mat& row_vector) const {
        if (row_vector.cols() != ambient_) throw std::invalid_argument("ambient mismatch");
        Mat v = row_vector;
        for (int r = 0; r < basis_.rows(); ++r) {
            int pc = pivot_col(r);
            Scalar f = v.at(0, pc);
            if (f.is_zero()) continue;
            for (int j = pc; j < ambient_; ++j) v.at(0, j) -= f * basis_.at(r, j);
        }
        return v.is_zero();
    }

    bool contains(const Subspace& other) const {
        for (int r = 0; r < other.dim(); ++r) {
            Mat row(1, ambient_, field());
            for (int j = 0; j < ambient_; ++j) row.at(0, j) = other.basis().at(r, j);
            if (!contains(row)) return false;
        }
        return true;
    }

private:
    int pivot_col(int r) const {
        for (int c = 0; c < ambient_; ++c)
            if (!basis_.at(r, c).is_zero()) return c;
        return -1;
    }

    int ambient_ = 0;
    Mat basis_;
};

inline Subspace subspace_sum(const Subspace& u, const Subspace& v) {
    if (u.ambient_dim() != v.ambient_dim() || u.field() != v.field())
        throw std::invalid_argument("subspace sum: ambient mismatch");
    Mat stacked(u.dim() + v.dim(), u.ambient_dim(), u.field());
    for (int i = 0; i < u.dim(); ++i)
        for (int j = 0; j < u.ambient_dim(); ++j) stacked.at(i, j) = u.basis().at(i, j);
    for (int i = 0; i < v.dim(); ++i)
        for (int j = 0; j < u.ambient_dim(); ++j) stacked.at(u.dim() + i, j) = v.basis().at(i, j);
    return Subspace::span(stacked);
}

// Zassenhaus: row-reduce [U U; V 0]; rows with zero left half carry a
// basis of the intersection in their right half.
inline Subspace subspace_intersect(const Subspace& u, const Subspace& v) {
    if (u.ambient_dim() != v.ambient_dim() || u.field() != v.field())
        throw std::invalid_argument("subspace intersection: ambient mismatch");
    const int d = u.ambient_dim();
    Mat z(u.dim() + v.dim(), 2 * d, u.field());
    for (int i = 0; i < u.dim(); ++i)
        for (int j = 0; j < d; ++j) {
            z.at(i, j) = u.basis().at(i, j);
            z.at(i, d + j) = u.basis().at(i, j);
        }
    for (int i = 0; i < v.dim(); ++i)
        for (int j = 0; j < d; ++j) z.at(u.dim() + i, j) = v.basis().at(i, j);
    auto [rank, red] = rref(std::move(z));
    (void)rank;
    std::vector<int> inter_rows;
    for (int r = 0; r < red.rows(); ++r) {
        bool left_zero = true;
        for (int j = 0; j < d && left_zero; ++j)
            if (!red.at(r, j).is_zero()) left_zero = false;
        bool right_nonzero = false;
        for (int j = 0; j < d && !right_nonzero; ++j)
            if (!red.at(r, d + j).is_zero()) right_nonzero = true;
        if (left_zero && right_nonzero) inter_rows.push_back(r);
    }
    Mat basis(static_cast<int>(inter_rows.size()), d, u.field());
    for (std::size_t i = 0; i < inter_rows.size(); ++i)
        for (int j = 0; j < d; ++j) basis.at(static_cast<int>(i), j) = red.at(inter_rows[i], d + j);
    return Subspace::span(basis);
}

}  // namespace qcalab
