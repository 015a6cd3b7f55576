#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "qcalab/matrix.hpp"
#include "qcalab/space.hpp"

namespace qcalab {

// A spin system: a dimension q_x >= 1 per site of a finite metric space.
struct SpinSystem {
    SpacePtr space;
    std::vector<std::int64_t> q;

    SpinSystem() = default;
    SpinSystem(SpacePtr sp, std::vector<std::int64_t> dims)
        : space(std::move(sp)), q(std::move(dims)) {
        if (!space || static_cast<int>(q.size()) != space->size())
            throw std::invalid_argument("spin system: one dimension per site required");
        for (auto d : q)
            if (d < 1) throw std::invalid_argument("spin system: dimensions must be >= 1");
    }

    static SpinSystem uniform(SpacePtr sp, std::int64_t d) {
        std::vector<std::int64_t> q(sp->size(), d);
        return SpinSystem(std::move(sp), std::move(q));
    }

    int sites() const { return space->size(); }
    std::int64_t dim(int x) const { return q[x]; }

    // The lattice: sites carrying a nontrivial algebra.
    std::vector<int> carrier() const {
        std::vector<int> c;
        for (int x = 0; x < sites(); ++x)
            if (q[x] > 1) c.push_back(x);
        return c;
    }

    bool operator==(const SpinSystem& o) const { return space == o.space && q == o.q; }
    bool operator!=(const SpinSystem& o) const { return !(*this == o); }
};

// Pointwise product of two systems on the same space.
inline SpinSystem stack_systems(const SpinSystem& a, const SpinSystem& b) {
    if (a.space != b.space) throw std::invalid_argument("stack_systems: space mismatch");
    std::vector<std::int64_t> q(a.q.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = a.q[i] * b.q[i];
    return SpinSystem(a.space, std::move(q));
}

namespace detail {

constexpr std::int64_t kMaxWindowDim = 1 << 14;

inline std::int64_t window_dim(const SpinSystem& sys, const std::vector<int>& support) {
    std::int64_t d = 1;
    for (int s : support) {
        d *= sys.dim(s);
        if (d > kMaxWindowDim)
            throw std::runtime_error("support window dimension exceeds the desk-scale cap");
    }
    return d;
}

// Mixed-radix digits for the fixed site order: earlier support site =
// slower-varying index.
inline void decode_index(std::int64_t idx, const std::vector<std::int64_t>& dims,
                         std::vector<std::int64_t>& out) {
    out.resize(dims.size());
    for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

inline std::int64_t encode_index(const std::vector<std::int64_t>& digits,
                                 const std::vector<std::int64_t>& dims) {
    std::int64_t idx = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) idx = idx * dims[k] + digits[k];
    return idx;
}

}  // namespace detail

inline std::vector<int> sorted_union(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> u;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(u));
    return u;
}

// An observable with explicit support: a q(S) x q(S) matrix over the
// ordered support S, implicitly tensored with the identity elsewhere.
class Element {
public:
    Element() = default;
    Element(SpinSystem sys, std::vector<int> support, Mat m)
        : sys_(std::move(sys)), support_(std::move(support)), m_(std::move(m)) {
        if (!std::is_sorted(support_.begin(), support_.end()) ||
            std::adjacent_find(support_.begin(), support_.end()) != support_.end())
            throw std::invalid_argument("element support must be strictly ascending");
        for (int s : support_)
            if (s < 0 || s >= sys_.sites()) throw std::invalid_argument("support site out of range");
        std::int64_t d = detail::window_dim(sys_, support_);
        if (m_.rows() != d || m_.cols() != d)
            throw std::invalid_argument("element matrix must be q(S) x q(S)");
    }

    static Element scalar(const SpinSystem& sys, const Scalar& c) {
        Mat m(1, 1, c.field());
        m.at(0, 0) = c;
        return Element(sys, {}, std::move(m));
    }
    static Element identity(const SpinSystem& sys, FieldTag field) {
        return scalar(sys, Scalar::one(field));
    }
    static Element zero(const SpinSystem& sys, FieldTag field) {
        return scalar(sys, Scalar::zero(field));
    }

    const SpinSystem& system() const { return sys_; }
    const std::vector<int>& support() const { return support_; }
    const Mat& matrix() const { return m_; }
    Mat& matrix() { return m_; }
    FieldTag field() const { return m_.field(); }
    std::int64_t window_dim() const { return m_.rows(); }

    std::vector<std::int64_t> support_dims() const {
        std::vector<std::int64_t> d(support_.size());
        for (std::size_t k = 0; k < support_.size(); ++k) d[k] = sys_.dim(support_[k]);
        return d;
    }

    bool is_zero() const { return m_.is_zero(); }

private:
    SpinSystem sys_;
    std::vector<int> support_;
    Mat m_;
};

// Single nonzero entry at one site: e_{ij} in Mat(q_x), 0-based indices.
inline Element matrix_unit(const SpinSystem& sys, int x, std::int64_t i, std::int64_t j,
                           FieldTag field) {
    if (x < 0 || x >= sys.sites()) throw std::invalid_argument("matrix_unit: site out of range");
    if (i < 0 || j < 0 || i >= sys.dim(x) || j >= sys.dim(x))
        throw std::invalid_argument("matrix_unit: index out of range");
    Mat m(static_cast<int>(sys.dim(x)), static_cast<int>(sys.dim(x)), field);
    m.at(static_cast<int>(i), static_cast<int>(j)) = Scalar::one(field);
    return Element(sys, {x}, std::move(m));
}

// Inserts identity tensor legs at the sites of sup2 \ support(a),
// respecting the ascending site order.
inline Element embed(const Element& a, const std::vector<int>& sup2) {
    if (a.support() == sup2) return a;
    if (!std::includes(sup2.begin(), sup2.end(), a.support().begin(), a.support().end()))
        throw std::invalid_argument("embed: target support does not contain source support");
    const SpinSystem& sys = a.system();
    std::vector<std::int64_t> big_dims(sup2.size());
    std::vector<int> pos_in_small(sup2.size(), -1);
    {
        std::size_t k = 0;
        for (std::size_t t = 0; t < sup2.size(); ++t) {
            big_dims[t] = sys.dim(sup2[t]);
            if (k < a.support().size() && a.support()[k] == sup2[t]) pos_in_small[t] = static_cast<int>(k++);
        }
    }
    std::int64_t big = detail::window_dim(sys, sup2);
    auto small_dims = a.support_dims();
    Mat m(static_cast<int>(big), static_cast<int>(big), a.field());
    std::vector<std::int64_t> di, dj, si(small_dims.size()), sj(small_dims.size());
    for (std::int64_t bi = 0; bi < big; ++bi) {
        detail::decode_index(bi, big_dims, di);
        for (std::int64_t bj = 0; bj < big; ++bj) {
            detail::decode_index(bj, big_dims, dj);
            bool off_diag = false;
            for (std::size_t t = 0; t < sup2.size(); ++t)
                if (pos_in_small[t] < 0 && di[t] != dj[t]) { off_diag = true; break; }
            if (off_diag) continue;
            for (std::size_t t = 0; t < sup2.size(); ++t)
                if (pos_in_small[t] >= 0) {
                    si[pos_in_small[t]] = di[t];
                    sj[pos_in_small[t]] = dj[t];
                }
            const Scalar& v = a.matrix().at(
                static_cast<int>(detail::encode_index(si, small_dims)),
                static_cast<int>(detail::encode_index(sj, small_dims)));
            if (!v.is_zero()) m.at(static_cast<int>(bi), static_cast<int>(bj)) = v;
        }
    }
    return Element(sys, sup2, std::move(m));
}

inline void check_shared_system(const Element& a, const Element& b) {
    if (a.system() != b.system()) throw std::invalid_argument("elements live on different systems");
    if (a.field() != b.field()) throw std::invalid_argument("mixed field tags");
}

inline Element add(const Element& a, const Element& b) {
    check_shared_system(a, b);
    auto u = sorted_union(a.support(), b.support());
    Element ea = embed(a, u), eb = embed(b, u);
    return Element(a.system(), u, ea.matrix() + eb.matrix());
}

inline Element sub(const Element& a, const Element& b) {
    check_shared_system(a, b);
    auto u = sorted_union(a.support(), b.support());
    Element ea = embed(a, u), eb = embed(b, u);
    return Element(a.system(), u, ea.matrix() - eb.matrix());
}

inline Element mul(const Element& a, const Element& b) {
    check_shared_system(a, b);
    auto u = sorted_union(a.support(), b.support());
    Element ea = embed(a, u), eb = embed(b, u);
    return Element(a.system(), u, ea.matrix() * eb.matrix());
}

inline Element scale(const Scalar& c, const Element& a) {
    return Element(a.system(), a.support(), c * a.matrix());
}

inline bool elements_equal(const Element& a, const Element& b) {
    if (a.system() != b.system() || a.field() != b.field()) return false;
    auto u = sorted_union(a.support(), b.support());
    return embed(a, u).matrix() == embed(b, u).matrix();
}

inline bool elements_commute(const Element& a, const Element& b) {
    std::vector<int> inter;
    std::set_intersection(a.support().begin(), a.support().end(),
                          b.support().begin(), b.support().end(), std::back_inserter(inter));
    if (inter.empty()) return true;  // disjoint supports always commute
    return elements_equal(mul(a, b), mul(b, a));
}

// Sitewise Kronecker product A(X,q) (x) A(X,r) -> A(X, q*r); the q-side
// indexes the slower axis at every site, matching the block formula
// Phi(A (x) B) = (a_ij B).
inline Element phi_stack(const Element& a, const Element& b) {
    if (a.system().space != b.system().space)
        throw std::invalid_argument("phi_stack: space mismatch");
    if (a.field() != b.field()) throw std::invalid_argument("mixed field tags");
    SpinSystem stacked = stack_systems(a.system(), b.system());
    auto u = sorted_union(a.support(), b.support());
    Element ea = embed(a, u), eb = embed(b, u);
    auto qa = ea.support_dims(), qb = eb.support_dims();
    std::vector<std::int64_t> qc(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) qc[k] = qa[k] * qb[k];
    std::int64_t big = detail::window_dim(stacked, u);
    Mat m(static_cast<int>(big), static_cast<int>(big), a.field());
    std::vector<std::int64_t> di, dj, ia(u.size()), ib(u.size()), ja(u.size()), jb(u.size());
    for (std::int64_t bi = 0; bi < big; ++bi) {
        detail::decode_index(bi, qc, di);
        for (std::size_t k = 0; k < u.size(); ++k) {
            ia[k] = di[k] / qb[k];
            ib[k] = di[k] % qb[k];
        }
        std::int64_t ra = detail::encode_index(ia, qa);
        std::int64_t rb = detail::encode_index(ib, qb);
        for (std::int64_t bj = 0; bj < big; ++bj) {
            detail::decode_index(bj, qc, dj);
            for (std::size_t k = 0; k < u.size(); ++k) {
                ja[k] = dj[k] / qb[k];
                jb[k] = dj[k] % qb[k];
            }
            Scalar v = ea.matrix().at(static_cast<int>(ra),
                                      static_cast<int>(detail::encode_index(ja, qa))) *
                       eb.matrix().at(static_cast<int>(rb),
                                      static_cast<int>(detail::encode_index(jb, qb)));
            if (!v.is_zero()) m.at(static_cast<int>(bi), static_cast<int>(bj)) = v;
        }
    }
    return Element(stacked, u, std::move(m));
}

// One term of the inverse Kronecker expansion: the coefficient of the
// q-side matrix unit e_{IJ} over the support.
struct PhiBlock {
    std::int64_t q_row;  // I, linear index over the q-side window
    std::int64_t q_col;  // J
    Element coeff;       // C_{IJ} over the r system
};

// Inverse of phi_stack: c = sum_{IJ} e_{IJ} (x) C_{IJ}; only nonzero
// blocks are returned.
inline std::vector<PhiBlock> phi_unstack(const Element& c, const SpinSystem& q_sys,
                                         const SpinSystem& r_sys) {
    if (stack_systems(q_sys, r_sys) != c.system())
        throw std::invalid_argument("phi_unstack: system is not the stack of the given factors");
    const auto& u = c.support();
    std::vector<std::int64_t> qa(u.size()), qb(u.size()), qc(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        qa[k] = q_sys.dim(u[k]);
        qb[k] = r_sys.dim(u[k]);
        qc[k] = qa[k] * qb[k];
    }
    std::int64_t qdim = 1, rdim = 1;
    for (auto d : qa) qdim *= d;
    for (auto d : qb) rdim *= d;
    std::vector<Mat> blocks(static_cast<std::size_t>(qdim) * qdim);
    std::vector<std::int64_t> di, dj, ia(u.size()), ib(u.size()), ja(u.size()), jb(u.size());
    std::int64_t big = c.window_dim();
    for (std::int64_t bi = 0; bi < big; ++bi) {
        detail::decode_index(bi, qc, di);
        for (std::size_t k = 0; k < u.size(); ++k) {
            ia[k] = di[k] / qb[k];
            ib[k] = di[k] % qb[k];
        }
        std::int64_t I = detail::encode_index(ia, qa);
        std::int64_t rr = detail::encode_index(ib, qb);
        for (std::int64_t bj = 0; bj < big; ++bj) {
            const Scalar& v = c.matrix().at(static_cast<int>(bi), static_cast<int>(bj));
            if (v.is_zero()) continue;
            detail::decode_index(bj, qc, dj);
            for (std::size_t k = 0; k < u.size(); ++k) {
                ja[k] = dj[k] / qb[k];
                jb[k] = dj[k] % qb[k];
            }
            std::int64_t J = detail::encode_index(ja, qa);
            std::int64_t rc = detail::encode_index(jb, qb);
            Mat& blk = blocks[static_cast<std::size_t>(I) * qdim + J];
            if (blk.rows() == 0) blk = Mat(static_cast<int>(rdim), static_cast<int>(rdim), c.field());
            blk.at(static_cast<int>(rr), static_cast<int>(rc)) = v;
        }
    }
    std::vector<PhiBlock> out;
    for (std::int64_t I = 0; I < qdim; ++I)
        for (std::int64_t J = 0; J < qdim; ++J) {
            Mat& blk = blocks[static_cast<std::size_t>(I) * qdim + J];
            if (blk.rows() == 0 || blk.is_zero()) continue;
            out.push_back(PhiBlock{I, J, Element(r_sys, u, std::move(blk))});
        }
    return out;
}

inline Element phi_restack(const std::vector<PhiBlock>& blocks, const SpinSystem& q_sys,
                           const SpinSystem& r_sys, const std::vector<int>& support,
                           FieldTag field) {
    SpinSystem stacked = stack_systems(q_sys, r_sys);
    Element acc = Element::zero(stacked, field);
    std::vector<std::int64_t> qa(support.size());
    for (std::size_t k = 0; k < support.size(); ++k) qa[k] = q_sys.dim(support[k]);
    std::vector<std::int64_t> idig, jdig;
    for (const auto& blk : blocks) {
        detail::decode_index(blk.q_row, qa, idig);
        detail::decode_index(blk.q_col, qa, jdig);
        Element unit = Element::identity(q_sys, field);
        for (std::size_t k = 0; k < support.size(); ++k)
            unit = mul(unit, matrix_unit(q_sys, support[k], idig[k], jdig[k], field));
        acc = add(acc, phi_stack(unit, blk.coeff));
    }
    return acc;
}

namespace detail {

// One pass of support shrinking: drop site position t when the matrix is
// block-diagonal in the t digit with equal blocks (then a = a' (x) Id_t).
inline bool try_drop_site(const Element& a, std::size_t t, Element& out) {
    const auto dims = a.support_dims();
    const std::int64_t dt = dims[t];
    std::vector<std::int64_t> rest_dims;
    std::vector<int> rest_sup;
    for (std::size_t k = 0; k < dims.size(); ++k)
        if (k != t) {
            rest_dims.push_back(dims[k]);
            rest_sup.push_back(a.support()[k]);
        }
    std::int64_t rest = 1;
    for (auto d : rest_dims) rest *= d;
    Mat reduced(static_cast<int>(rest), static_cast<int>(rest), a.field());
    std::vector<std::int64_t> ri, rj, fi(dims.size()), fj(dims.size());
    for (std::int64_t i = 0; i < rest; ++i) {
        decode_index(i, rest_dims, ri);
        for (std::int64_t j = 0; j < rest; ++j) {
            decode_index(j, rest_dims, rj);
            for (std::size_t k = 0, m = 0; k < dims.size(); ++k)
                if (k != t) {
                    fi[k] = ri[m];
                    fj[k] = rj[m];
                    ++m;
                }
            // off-diagonal blocks in the t digit must vanish
            for (std::int64_t u = 0; u < dt; ++u)
                for (std::int64_t v = 0; v < dt; ++v) {
                    if (u == v) continue;
                    fi[t] = u;
                    fj[t] = v;
                    if (!a.matrix().at(static_cast<int>(encode_index(fi, dims)),
                                       static_cast<int>(encode_index(fj, dims))).is_zero())
                        return false;
                }
            fi[t] = 0;
            fj[t] = 0;
            Scalar v0 = a.matrix().at(static_cast<int>(encode_index(fi, dims)),
                                      static_cast<int>(encode_index(fj, dims)));
            for (std::int64_t u = 1; u < dt; ++u) {
                fi[t] = u;
                fj[t] = u;
                if (a.matrix().at(static_cast<int>(encode_index(fi, dims)),
                                  static_cast<int>(encode_index(fj, dims))) != v0)
                    return false;
            }
            if (!v0.is_zero()) reduced.at(static_cast<int>(i), static_cast<int>(j)) = v0;
        }
    }
    out = Element(a.system(), rest_sup, std::move(reduced));
    return true;
}

}  // namespace detail

// Smallest support carrying the element: per-site membership in the
// embedded subalgebra over the remaining sites, iterated until stable.
inline Element minimize_support(Element a) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t t = 0; t < a.support().size(); ++t) {
            Element shrunk;
            if (detail::try_drop_site(a, t, shrunk)) {
                a = std::move(shrunk);
                changed = true;
                break;
            }
        }
    }
    return a;
}

}  // namespace qcalab
