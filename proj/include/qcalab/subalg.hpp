#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qcalab/spin.hpp"
#include "qcalab/subspace.hpp"

namespace qcalab {

inline Mat vec_row(const Mat& m) {
    Mat v(1, m.rows() * m.cols(), m.field());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) v.at(0, i * m.cols() + j) = m.at(i, j);
    return v;
}

inline Mat unvec(const Mat& v, int n) {
    Mat m(n, n, v.field());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.at(i, j) = v.at(0, i * n + j);
    return m;
}

// Commutant of a set of n x n matrices, computed by shrinking a basis of
// the current solution space one generator at a time.
inline Subspace matrix_commutant(int n, FieldTag field, const std::vector<Mat>& gens,
                                 std::optional<Subspace> start = std::nullopt) {
    Subspace cur = start ? *start : Subspace::span(Mat::identity(n * n, field));
    for (const Mat& g : gens) {
        if (cur.dim() == 0) break;
        Mat constraints(cur.dim(), n * n, field);
        for (int r = 0; r < cur.dim(); ++r) {
            Mat b(1, n * n, field);
            for (int j = 0; j < n * n; ++j) b.at(0, j) = cur.basis().at(r, j);
            Mat bm = unvec(b, n);
            Mat c = bm * g - g * bm;
            Mat cv = vec_row(c);
            for (int j = 0; j < n * n; ++j) constraints.at(r, j) = cv.at(0, j);
        }
        Mat null = nullspace(constraints.transpose());  // rows: combos with zero commutator
        Mat new_basis = null * cur.basis();
        cur = Subspace::span(new_basis);
    }
    return cur;
}

// A unital subalgebra of a windowed observable algebra. Held either as a
// dense subspace of the q(S)^2-dimensional matrix space of the window, or
// in factored form as a tensor product of per-site subspaces (the form the
// boundary computation produces for shift-like automorphisms, where dense
// storage would be prohibitive).
class Subalgebra {
public:
    Subalgebra() = default;

    static Subalgebra dense(SpinSystem sys, std::vector<int> support, Subspace space) {
        Subalgebra b;
        b.sys_ = std::move(sys);
        b.support_ = std::move(support);
        b.factored_ = false;
        b.dense_ = std::move(space);
        std::int64_t d = detail::window_dim(b.sys_, b.support_);
        if (b.dense_.ambient_dim() != d * d)
            throw std::invalid_argument("subalgebra: subspace ambient must be q(S)^2");
        return b;
    }

    static Subalgebra factored(SpinSystem sys, std::vector<int> support,
                               std::vector<Subspace> site_spaces) {
        Subalgebra b;
        b.sys_ = std::move(sys);
        b.support_ = std::move(support);
        b.factored_ = true;
        if (site_spaces.size() != b.support_.size())
            throw std::invalid_argument("subalgebra: one site space per support site");
        for (std::size_t t = 0; t < b.support_.size(); ++t) {
            std::int64_t d = b.sys_.dim(b.support_[t]);
            if (site_spaces[t].ambient_dim() != d * d)
                throw std::invalid_argument("subalgebra: site space ambient must be q_t^2");
        }
        b.site_spaces_ = std::move(site_spaces);
        return b;
    }

    const SpinSystem& system() const { return sys_; }
    const std::vector<int>& support() const { return support_; }
    bool is_factored() const { return factored_; }
    const Subspace& space() const { return dense_; }
    const std::vector<Subspace>& site_spaces() const { return site_spaces_; }

    FieldTag field() const { return factored_ ? site_spaces_.front().field() : dense_.field(); }

    std::int64_t dim() const {
        if (!factored_) return dense_.dim();
        std::int64_t d = 1;
        for (const auto& s : site_spaces_) d *= s.dim();
        return d;
    }

    std::int64_t window_dim() const { return detail::window_dim(sys_, support_); }

    bool contains(const Element& e) const {
        Element x = minimize_support(e);
        if (!std::includes(support_.begin(), support_.end(), x.support().begin(),
                           x.support().end()))
            return false;
        if (!factored_) {
            Element emb = embed(x, support_);
            return dense_.contains(vec_row(emb.matrix()));
        }
        // factored: every mode-t slice family must lie in the site space
        Element emb = embed(x, support_);
        auto dims = emb.support_dims();
        std::vector<std::int64_t> di, dj;
        for (std::size_t t = 0; t < support_.size(); ++t) {
            const std::int64_t dt = dims[t];
            std::int64_t rest = emb.window_dim() / dt;
            Mat slices(static_cast<int>(rest * rest), static_cast<int>(dt * dt), field());
            for (std::int64_t i = 0; i < emb.window_dim(); ++i) {
                detail::decode_index(i, dims, di);
                for (std::int64_t j = 0; j < emb.window_dim(); ++j) {
                    const Scalar& v = emb.matrix().at(static_cast<int>(i), static_cast<int>(j));
                    if (v.is_zero()) continue;
                    detail::decode_index(j, dims, dj);
                    std::int64_t it = di[t], jt = dj[t];
                    std::vector<std::int64_t> ri, rj;
                    std::vector<std::int64_t> rest_dims;
                    for (std::size_t k = 0; k < dims.size(); ++k)
                        if (k != t) {
                            ri.push_back(di[k]);
                            rj.push_back(dj[k]);
                            rest_dims.push_back(dims[k]);
                        }
                    std::int64_t row = detail::encode_index(ri, rest_dims) * rest +
                                       detail::encode_index(rj, rest_dims);
                    slices.at(static_cast<int>(row), static_cast<int>(it * dt + jt)) = v;
                }
            }
            if (!site_spaces_[t].contains(Subspace::span(slices))) return false;
        }
        return true;
    }

    // Dense representation; only valid for desk-scale windows.
    Subalgebra densify() const {
        if (!factored_) return *this;
        std::int64_t wd = window_dim();
        std::int64_t d = dim();
        Mat rows(static_cast<int>(d), static_cast<int>(wd * wd), field());
        std::vector<std::int64_t> counts(site_spaces_.size());
        for (std::size_t t = 0; t < site_spaces_.size(); ++t) counts[t] = site_spaces_[t].dim();
        std::vector<std::int64_t> pick;
        for (std::int64_t r = 0; r < d; ++r) {
            detail::decode_index(r, counts, pick);
            Element prod = Element::identity(sys_, field());
            for (std::size_t t = 0; t < site_spaces_.size(); ++t) {
                std::int64_t n = sys_.dim(support_[t]);
                Mat basis_vec(1, static_cast<int>(n * n), field());
                for (int j = 0; j < n * n; ++j)
                    basis_vec.at(0, j) = site_spaces_[t].basis().at(static_cast<int>(pick[t]), j);
                prod = mul(prod, Element(sys_, {support_[t]}, unvec(basis_vec, static_cast<int>(n))));
            }
            Mat v = vec_row(embed(prod, support_).matrix());
            for (std::int64_t j = 0; j < wd * wd; ++j)
                rows.at(static_cast<int>(r), static_cast<int>(j)) = v.at(0, static_cast<int>(j));
        }
        return dense(sys_, support_, Subspace::span(rows));
    }

    // Basis as window elements (dense form only).
    std::vector<Element> basis_elements() const {
        if (factored_) return densify().basis_elements();
        std::vector<Element> out;
        int n = static_cast<int>(window_dim());
        for (int r = 0; r < dense_.dim(); ++r) {
            Mat v(1, n * n, field());
            for (int j = 0; j < n * n; ++j) v.at(0, j) = dense_.basis().at(r, j);
            out.emplace_back(sys_, support_, unvec(v, n));
        }
        return out;
    }

private:
    SpinSystem sys_;
    std::vector<int> support_;
    bool factored_ = false;
    Subspace dense_;
    std::vector<Subspace> site_spaces_;
};

// Smallest unital subalgebra of the window containing the generators:
// iterated span-of-products until the subspace stabilizes. The round cap
// guarantees termination even on malformed input.
inline Subalgebra generate(const std::vector<Element>& gens, const SpinSystem& sys,
                           const std::vector<int>& support, FieldTag field) {
    const int n = static_cast<int>(detail::window_dim(sys, support));
    std::vector<Mat> mats;
    mats.push_back(Mat::identity(n, field));
    for (const auto& g : gens) mats.push_back(embed(g, support).matrix());
    Mat rows(static_cast<int>(mats.size()), n * n, field);
    for (std::size_t i = 0; i < mats.size(); ++i) {
        Mat v = vec_row(mats[i]);
        for (int j = 0; j < n * n; ++j) rows.at(static_cast<int>(i), j) = v.at(0, j);
    }
    Subspace span = Subspace::span(rows);
    const std::int64_t cap = static_cast<std::int64_t>(n) * n;
    for (std::int64_t round = 0;; ++round) {
        if (round > cap) throw std::runtime_error("generate: closure failed to stabilize");
        std::vector<Mat> basis;
        for (int r = 0; r < span.dim(); ++r) {
            Mat v(1, n * n, field);
            for (int j = 0; j < n * n; ++j) v.at(0, j) = span.basis().at(r, j);
            basis.push_back(unvec(v, n));
        }
        Mat prods(span.dim() * span.dim() + span.dim(), n * n, field);
        int rr = 0;
        for (int i = 0; i < span.dim(); ++i)
            for (int j = 0; j < span.dim(); ++j) {
                Mat v = vec_row(basis[i] * basis[j]);
                for (int c = 0; c < n * n; ++c) prods.at(rr, c) = v.at(0, c);
                ++rr;
            }
        for (int i = 0; i < span.dim(); ++i) {
            for (int c = 0; c < n * n; ++c) prods.at(rr, c) = span.basis().at(i, c);
            ++rr;
        }
        Subspace next = Subspace::span(prods);
        if (next.dim() == span.dim()) return Subalgebra::dense(sys, support, next);
        span = next;
    }
}

// Centralizer inside the window algebra. Factored input stays factored:
// the commutant of a tensor product of per-site sets is the tensor product
// of the per-site commutants.
inline Subalgebra centralizer(const Subalgebra& b) {
    if (b.is_factored()) {
        std::vector<Subspace> cents;
        for (std::size_t t = 0; t < b.support().size(); ++t) {
            int n = static_cast<int>(b.system().dim(b.support()[t]));
            std::vector<Mat> gens;
            for (int r = 0; r < b.site_spaces()[t].dim(); ++r) {
                Mat v(1, n * n, b.field());
                for (int j = 0; j < n * n; ++j) v.at(0, j) = b.site_spaces()[t].basis().at(r, j);
                gens.push_back(unvec(v, n));
            }
            cents.push_back(matrix_commutant(n, b.field(), gens));
        }
        return Subalgebra::factored(b.system(), b.support(), std::move(cents));
    }
    const int n = static_cast<int>(b.window_dim());
    std::vector<Mat> gens;
    for (const auto& e : b.basis_elements()) gens.push_back(embed(e, b.support()).matrix());
    Subspace c = matrix_commutant(n, b.field(), gens);
    return Subalgebra::dense(b.system(), b.support(), c);
}

struct TensorPairCertificate {
    bool commute = false;
    bool dims_match = false;
    bool mult_full_rank = false;
    bool intersection_scalars = false;
    std::int64_t dim_b = 0, dim_c = 0, window_sq = 0;

    bool passed() const { return commute && dims_match && mult_full_rank && intersection_scalars; }
};

namespace detail {

inline TensorPairCertificate verify_pair_dense(const Subalgebra& b, const Subalgebra& c) {
    TensorPairCertificate cert;
    const int n = static_cast<int>(b.window_dim());
    cert.dim_b = b.dim();
    cert.dim_c = c.dim();
    cert.window_sq = static_cast<std::int64_t>(n) * n;
    auto bb = b.basis_elements();
    auto cb = c.basis_elements();
    cert.commute = true;
    for (const auto& x : bb) {
        for (const auto& y : cb)
            if (!elements_commute(x, y)) { cert.commute = false; break; }
        if (!cert.commute) break;
    }
    cert.dims_match = cert.dim_b * cert.dim_c == cert.window_sq;
    Mat prods(static_cast<int>(bb.size() * cb.size()), n * n, b.field());
    int r = 0;
    for (const auto& x : bb)
        for (const auto& y : cb) {
            Mat v = vec_row(embed(mul(x, y), b.support()).matrix());
            for (int j = 0; j < n * n; ++j) prods.at(r, j) = v.at(0, j);
            ++r;
        }
    cert.mult_full_rank = rank_of(prods) == cert.window_sq;
    Subspace inter = subspace_intersect(b.space(), c.space());
    cert.intersection_scalars =
        inter.dim() == 1 && inter.contains(vec_row(Mat::identity(n, b.field())));
    return cert;
}

inline TensorPairCertificate verify_pair_factored(const Subalgebra& b, const Subalgebra& c) {
    TensorPairCertificate cert;
    cert.dim_b = b.dim();
    cert.dim_c = c.dim();
    cert.window_sq = 1;
    for (int s : b.support()) {
        std::int64_t d = b.system().dim(s);
        cert.window_sq *= d * d;
    }
    cert.commute = true;
    cert.mult_full_rank = true;
    cert.intersection_scalars = true;
    for (std::size_t t = 0; t < b.support().size(); ++t) {
        int n = static_cast<int>(b.system().dim(b.support()[t]));
        Subalgebra bt = Subalgebra::dense(b.system(), {b.support()[t]}, b.site_spaces()[t]);
        Subalgebra ct = Subalgebra::dense(b.system(), {b.support()[t]}, c.site_spaces()[t]);
        TensorPairCertificate site = verify_pair_dense(bt, ct);
        cert.commute = cert.commute && site.commute;
        // per-site full rank and scalar intersection tensor together
        cert.mult_full_rank =
            cert.mult_full_rank && site.mult_full_rank;
        cert.intersection_scalars = cert.intersection_scalars && site.intersection_scalars;
        (void)n;
    }
    cert.dims_match = cert.dim_b * cert.dim_c == cert.window_sq;
    return cert;
}

}  // namespace detail

// The four checks behind the mutual-centralizer structure: pairwise
// commutation, complementary dimensions, surjective multiplication map,
// scalar intersection.
inline TensorPairCertificate verify_tensor_pair(const Subalgebra& b, const Subalgebra& c) {
    if (b.support() != c.support() || b.system() != c.system())
        throw std::invalid_argument("verify_tensor_pair: windows differ");
    if (b.is_factored() && c.is_factored()) return detail::verify_pair_factored(b, c);
    Subalgebra bd = b.densify(), cd = c.densify();
    return detail::verify_pair_dense(bd, cd);
}

// Given the window split as (A-part sites) x (C-part sites) with the full
// A-part algebra inside B, recovers D = {c : 1 (x) c in B}, the relative
// tensor complement. Certifies B = A-part (x) D by the dimension count and
// span containment.
inline Subalgebra tensor_split(const Subalgebra& b, const std::vector<int>& a_sites,
                               const std::vector<int>& c_sites) {
    Subalgebra bd = b.densify();
    std::vector<int> win = sorted_union(a_sites, c_sites);
    if (win != bd.support()) throw std::invalid_argument("tensor_split: split does not cover the window");
    const SpinSystem& sys = bd.system();
    FieldTag f = bd.field();
    // precondition: A-part (x) 1 inside B
    std::int64_t adim = detail::window_dim(sys, a_sites);
    for (std::int64_t i = 0; i < adim; ++i)
        for (std::int64_t j = 0; j < adim; ++j) {
            Mat u(static_cast<int>(adim), static_cast<int>(adim), f);
            u.at(static_cast<int>(i), static_cast<int>(j)) = Scalar::one(f);
            Element e(sys, a_sites, std::move(u));
            if (!bd.contains(e))
                throw std::invalid_argument("tensor_split: A-part algebra not contained in B");
        }
    // D = preimage of span(B) under the embedding of the C-part
    std::int64_t cdim = detail::window_dim(sys, c_sites);
    std::int64_t wd = bd.window_dim();
    Mat emb_rows(static_cast<int>(cdim * cdim), static_cast<int>(wd * wd), f);
    for (std::int64_t k = 0; k < cdim * cdim; ++k) {
        Mat u(static_cast<int>(cdim), static_cast<int>(cdim), f);
        u.at(static_cast<int>(k / cdim), static_cast<int>(k % cdim)) = Scalar::one(f);
        Mat v = vec_row(embed(Element(sys, c_sites, std::move(u)), win).matrix());
        for (std::int64_t j = 0; j < wd * wd; ++j)
            emb_rows.at(static_cast<int>(k), static_cast<int>(j)) = v.at(0, static_cast<int>(j));
    }
    Subspace embedded_c = Subspace::span(emb_rows);
    Subspace inter = subspace_intersect(embedded_c, bd.space());
    // pull the intersection back through the embedding
    Mat pullback(inter.dim(), static_cast<int>(cdim * cdim), f);
    for (int r = 0; r < inter.dim(); ++r) {
        Mat v(1, static_cast<int>(wd * wd), f);
        for (std::int64_t j = 0; j < wd * wd; ++j)
            v.at(0, static_cast<int>(j)) = inter.basis().at(r, static_cast<int>(j));
        Element w(sys, win, unvec(v, static_cast<int>(wd)));
        Element small = minimize_support(w);
        if (!std::includes(c_sites.begin(), c_sites.end(), small.support().begin(),
                           small.support().end()))
            throw std::logic_error("tensor_split: intersection escaped the C-part");
        Mat cv = vec_row(embed(small, c_sites).matrix());
        for (std::int64_t j = 0; j < cdim * cdim; ++j)
            pullback.at(r, static_cast<int>(j)) = cv.at(0, static_cast<int>(j));
    }
    Subalgebra d = Subalgebra::dense(sys, c_sites, Subspace::span(pullback));
    if (adim * adim * d.dim() != bd.dim())
        throw std::runtime_error("tensor_split: dimension count failed, B is not A (x) D");
    return d;
}

}  // namespace qcalab
