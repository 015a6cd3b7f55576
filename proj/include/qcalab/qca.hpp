#pragma once

#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "qcalab/subalg.hpp"

namespace qcalab {

// Canonical Kronecker factorization of Mat(k^q) into prime blocks,
// primes nondecreasing; the leg order is the digit order, earlier leg
// slower.
inline std::vector<std::int64_t> prime_legs(std::int64_t q) {
    std::vector<std::int64_t> legs;
    for (std::int64_t p = 2; p * p <= q; ++p)
        while (q % p == 0) {
            legs.push_back(p);
            q /= p;
        }
    if (q > 1) legs.push_back(q);
    return legs;
}

// e^{(p_t)}_{ij} tensored with identities on the other legs, as a q x q
// matrix in the canonical digit order.
inline Mat leg_unit_matrix(const std::vector<std::int64_t>& legs, std::size_t t, std::int64_t i,
                           std::int64_t j, FieldTag field) {
    std::int64_t q = 1;
    for (auto p : legs) q *= p;
    Mat m(static_cast<int>(q), static_cast<int>(q), field);
    std::vector<std::int64_t> dr, dc;
    for (std::int64_t r = 0; r < q; ++r) {
        detail::decode_index(r, legs, dr);
        if (dr[t] != i) continue;
        dc = dr;
        dc[t] = j;
        m.at(static_cast<int>(r), static_cast<int>(detail::encode_index(dc, legs))) =
            Scalar::one(field);
    }
    return m;
}

// A locality-preserving homomorphism between two spin systems on one
// space, stored as the images of the canonical prime-leg matrix units at
// every site. Images of full single-site units are products of leg
// images, so they are always derivable; storing legs keeps shift-like
// automorphisms at their natural size.
class Homo {
public:
    Homo() = default;

    // images[x][t] lists the p_t^2 unit images of leg t at site x, row-major.
    Homo(SpinSystem source, SpinSystem target, FieldTag field,
         std::vector<std::vector<std::vector<Element>>> images)
        : source_(std::move(source)), target_(std::move(target)), field_(field),
          images_(std::move(images)) {
        if (source_.space != target_.space)
            throw std::invalid_argument("homomorphism: source and target must share the space");
        if (static_cast<int>(images_.size()) != source_.sites())
            throw std::invalid_argument("homomorphism: one image table per site");
        for (int x = 0; x < source_.sites(); ++x) {
            auto legs = prime_legs(source_.dim(x));
            if (images_[x].size() != legs.size())
                throw std::invalid_argument("homomorphism: one image list per prime leg");
            for (std::size_t t = 0; t < legs.size(); ++t) {
                if (static_cast<std::int64_t>(images_[x][t].size()) != legs[t] * legs[t])
                    throw std::invalid_argument("homomorphism: p^2 unit images per leg");
                for (auto& e : images_[x][t]) {
                    if (e.system() != target_) throw std::invalid_argument(
                        "homomorphism: images must live on the target system");
                    e = minimize_support(e);
                }
            }
        }
        spread_ = compute_spread();
    }

    static Homo identity(const SpinSystem& sys, FieldTag field) {
        std::vector<std::vector<std::vector<Element>>> images(sys.sites());
        for (int x = 0; x < sys.sites(); ++x) {
            auto legs = prime_legs(sys.dim(x));
            images[x].resize(legs.size());
            for (std::size_t t = 0; t < legs.size(); ++t)
                for (std::int64_t i = 0; i < legs[t]; ++i)
                    for (std::int64_t j = 0; j < legs[t]; ++j)
                        images[x][t].push_back(
                            Element(sys, {x}, leg_unit_matrix(legs, t, i, j, field)));
        }
        return Homo(sys, sys, field, std::move(images));
    }

    const SpinSystem& source() const { return source_; }
    const SpinSystem& target() const { return target_; }
    FieldTag field() const { return field_; }
    const Rational& spread() const { return spread_; }

    const Element& leg_image(int x, std::size_t t, std::int64_t i, std::int64_t j) const {
        std::int64_t p = prime_legs(source_.dim(x))[t];
        return images_[x][t][static_cast<std::size_t>(i * p + j)];
    }
    const std::vector<std::vector<std::vector<Element>>>& images() const { return images_; }

    // Image of the full single-site unit e^{(q_x)}_{ij}.
    Element unit_image(int x, std::int64_t i, std::int64_t j) const {
        auto legs = prime_legs(source_.dim(x));
        if (legs.empty()) return Element::identity(target_, field_);
        std::vector<std::int64_t> di, dj;
        detail::decode_index(i, legs, di);
        detail::decode_index(j, legs, dj);
        Element acc = leg_image(x, 0, di[0], dj[0]);
        for (std::size_t t = 1; t < legs.size(); ++t)
            acc = mul(acc, leg_image(x, t, di[t], dj[t]));
        return acc;
    }

private:
    Rational compute_spread() const {
        Rational s(0);
        for (int x = 0; x < source_.sites(); ++x)
            for (const auto& leg : images_[x])
                for (const auto& img : leg)
                    for (int y : img.support())
                        s = std::max(s, source_.space->dist(x, y));
        return s;
    }

    SpinSystem source_, target_;
    FieldTag field_;
    std::vector<std::vector<std::vector<Element>>> images_;
    Rational spread_;
};

inline bool homos_equal(const Homo& a, const Homo& b) {
    if (a.source() != b.source() || a.target() != b.target() || a.field() != b.field())
        return false;
    for (int x = 0; x < a.source().sites(); ++x) {
        auto legs = prime_legs(a.source().dim(x));
        for (std::size_t t = 0; t < legs.size(); ++t)
            for (std::int64_t i = 0; i < legs[t]; ++i)
                for (std::int64_t j = 0; j < legs[t]; ++j)
                    if (!elements_equal(a.leg_image(x, t, i, j), b.leg_image(x, t, i, j)))
                        return false;
    }
    return true;
}

// Applies h to an element of the source algebra: expand over the support
// in products of single-site units, map each factor, multiply, sum.
inline Element apply(const Homo& h, const Element& a) {
    if (a.system() != h.source()) throw std::invalid_argument("apply: element not on the source system");
    const auto& sup = a.support();
    if (sup.empty())
        return scale(a.matrix().at(0, 0), Element::identity(h.target(), h.field()));
    auto dims = a.support_dims();
    std::map<std::tuple<int, std::int64_t, std::int64_t>, Element> cache;
    auto image_of = [&](int x, std::int64_t i, std::int64_t j) -> const Element& {
        auto key = std::make_tuple(x, i, j);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, h.unit_image(x, i, j)).first;
        return it->second;
    };
    Element acc = Element::zero(h.target(), h.field());
    std::vector<std::int64_t> di, dj;
    for (std::int64_t r = 0; r < a.window_dim(); ++r) {
        for (std::int64_t c = 0; c < a.window_dim(); ++c) {
            const Scalar& v = a.matrix().at(static_cast<int>(r), static_cast<int>(c));
            if (v.is_zero()) continue;
            detail::decode_index(r, dims, di);
            detail::decode_index(c, dims, dj);
            Element term = image_of(sup[0], di[0], dj[0]);
            for (std::size_t t = 1; t < sup.size(); ++t)
                term = mul(term, image_of(sup[t], di[t], dj[t]));
            acc = add(acc, scale(v, term));
        }
    }
    return minimize_support(acc);
}

// Every condition the stored images must satisfy for h to be a unital
// algebra homomorphism of its recorded spread. An empty report means all
// hold.
inline std::vector<std::string> verify(const Homo& h) {
    std::vector<std::string> report;
    const auto& src = h.source();
    FieldTag f = h.field();
    for (int x = 0; x < src.sites(); ++x) {
        auto legs = prime_legs(src.dim(x));
        for (std::size_t t = 0; t < legs.size(); ++t) {
            const std::int64_t p = legs[t];
            for (std::int64_t i = 0; i < p; ++i)
                for (std::int64_t j = 0; j < p; ++j)
                    for (std::int64_t k = 0; k < p; ++k)
                        for (std::int64_t l = 0; l < p; ++l) {
                            Element lhs = mul(h.leg_image(x, t, i, j), h.leg_image(x, t, k, l));
                            Element rhs = (j == k)
                                              ? h.leg_image(x, t, i, l)
                                              : Element::zero(h.target(), f);
                            if (!elements_equal(lhs, rhs))
                                report.push_back("unit relation violated at site " +
                                                 std::to_string(x) + " leg " + std::to_string(t));
                        }
            Element sum = Element::zero(h.target(), f);
            for (std::int64_t i = 0; i < p; ++i) sum = add(sum, h.leg_image(x, t, i, i));
            if (!elements_equal(sum, Element::identity(h.target(), f)))
                report.push_back("unit sum violated at site " + std::to_string(x) + " leg " +
                                 std::to_string(t));
            for (std::size_t u = t + 1; u < legs.size(); ++u)
                for (std::int64_t a = 0; a < p * p; ++a)
                    for (std::int64_t b = 0; b < legs[u] * legs[u]; ++b)
                        if (!elements_commute(
                                h.leg_image(x, t, a / p, a % p),
                                h.leg_image(x, u, b / legs[u], b % legs[u])))
                            report.push_back("same-site legs fail to commute at site " +
                                             std::to_string(x));
        }
    }
    for (int x = 0; x < src.sites(); ++x) {
        auto lx = prime_legs(src.dim(x));
        for (int y = x + 1; y < src.sites(); ++y) {
            auto ly = prime_legs(src.dim(y));
            for (std::size_t t = 0; t < lx.size(); ++t)
                for (std::size_t u = 0; u < ly.size(); ++u)
                    for (std::int64_t a = 0; a < lx[t] * lx[t]; ++a)
                        for (std::int64_t b = 0; b < ly[u] * ly[u]; ++b)
                            if (!elements_commute(
                                    h.leg_image(x, t, a / lx[t], a % lx[t]),
                                    h.leg_image(y, u, b / ly[u], b % ly[u])))
                                report.push_back("cross-site commutation violated between sites " +
                                                 std::to_string(x) + " and " + std::to_string(y));
        }
    }
    return report;
}

// Lifts an element of A(X, r) to A(X, r * u) (identity on the u legs when
// left is true, on the r legs otherwise), matching the per-site stacking
// convention: the left factor indexes the slower digit.
inline Element lift_tensor(const Element& a, const SpinSystem& other, bool left) {
    const SpinSystem& own = a.system();
    SpinSystem stacked = left ? stack_systems(own, other) : stack_systems(other, own);
    const auto& sup = a.support();
    std::vector<std::int64_t> own_dims = a.support_dims();
    std::vector<std::int64_t> oth_dims(sup.size()), big_dims(sup.size());
    for (std::size_t k = 0; k < sup.size(); ++k) {
        oth_dims[k] = other.dim(sup[k]);
        big_dims[k] = own_dims[k] * oth_dims[k];
    }
    std::int64_t big = detail::window_dim(stacked, sup);
    Mat m(static_cast<int>(big), static_cast<int>(big), a.field());
    std::vector<std::int64_t> di, dj, oi(sup.size()), oj(sup.size()), ui(sup.size()), uj(sup.size());
    for (std::int64_t bi = 0; bi < big; ++bi) {
        detail::decode_index(bi, big_dims, di);
        for (std::size_t k = 0; k < sup.size(); ++k) {
            if (left) { oi[k] = di[k] / oth_dims[k]; ui[k] = di[k] % oth_dims[k]; }
            else      { ui[k] = di[k] / own_dims[k]; oi[k] = di[k] % own_dims[k]; }
        }
        for (std::int64_t bj = 0; bj < big; ++bj) {
            detail::decode_index(bj, big_dims, dj);
            bool diag = true;
            for (std::size_t k = 0; k < sup.size() && diag; ++k) {
                if (left) { oj[k] = dj[k] / oth_dims[k]; uj[k] = dj[k] % oth_dims[k]; }
                else      { uj[k] = dj[k] / own_dims[k]; oj[k] = dj[k] % own_dims[k]; }
                if (ui[k] != uj[k]) diag = false;
            }
            if (!diag) continue;
            const Scalar& v = a.matrix().at(
                static_cast<int>(detail::encode_index(oi, own_dims)),
                static_cast<int>(detail::encode_index(oj, own_dims)));
            if (!v.is_zero()) m.at(static_cast<int>(bi), static_cast<int>(bj)) = v;
        }
    }
    return Element(stacked, sup, std::move(m));
}

// Phi-conjugated tensor of two homomorphisms: acts as a on the left
// Kronecker factor of every site and as b on the right one.
inline Homo stack(const Homo& a, const Homo& b) {
    if (a.source().space != b.source().space) throw std::invalid_argument("stack: space mismatch");
    if (a.field() != b.field()) throw std::invalid_argument("stack: mixed field tags");
    SpinSystem src = stack_systems(a.source(), b.source());
    SpinSystem tgt = stack_systems(a.target(), b.target());
    FieldTag f = a.field();
    std::vector<std::vector<std::vector<Element>>> images(src.sites());
    for (int x = 0; x < src.sites(); ++x) {
        auto legs = prime_legs(src.dim(x));
        images[x].resize(legs.size());
        SpinSystem qx_sys = a.source();
        SpinSystem rx_sys = b.source();
        for (std::size_t t = 0; t < legs.size(); ++t) {
            for (std::int64_t i = 0; i < legs[t]; ++i)
                for (std::int64_t j = 0; j < legs[t]; ++j) {
                    Element unit(src, {x}, leg_unit_matrix(legs, t, i, j, f));
                    // decompose through the per-site q (x) q' block structure
                    auto blocks = phi_unstack(unit, qx_sys, rx_sys);
                    Element acc = Element::zero(tgt, f);
                    for (const auto& blk : blocks) {
                        Element qa = a.unit_image(x, blk.q_row, blk.q_col);
                        Element rb = apply(b, blk.coeff);
                        acc = add(acc, phi_stack(qa, rb));
                    }
                    images[x][t].push_back(minimize_support(acc));
                }
        }
    }
    return Homo(src, tgt, f, std::move(images));
}

// Canonical inclusion into a larger system: tensor with the identity
// automorphism of s / q, realized through the stacking conjugation.
inline Homo stabilize(const Homo& a, const SpinSystem& s) {
    if (s.space != a.source().space) throw std::invalid_argument("stabilize: space mismatch");
    std::vector<std::int64_t> u(s.q.size());
    for (std::size_t x = 0; x < u.size(); ++x) {
        if (s.q[x] % a.source().q[x] != 0)
            throw std::invalid_argument("stabilize: source must divide the stabilized system");
        u[x] = s.q[x] / a.source().q[x];
    }
    SpinSystem usys(s.space, std::move(u));
    return stack(a, Homo::identity(usys, a.field()));
}

// b after a, with lcm stabilization when target(a) and source(b) differ.
inline Homo compose(const Homo& b, const Homo& a) {
    if (a.source().space != b.source().space) throw std::invalid_argument("compose: space mismatch");
    if (a.field() != b.field()) throw std::invalid_argument("compose: mixed field tags");
    const Homo* pa = &a;
    const Homo* pb = &b;
    std::optional<Homo> sa, sb;
    if (a.target() != b.source()) {
        std::vector<std::int64_t> s(a.target().q.size());
        for (std::size_t x = 0; x < s.size(); ++x)
            s[x] = std::lcm(a.target().q[x], b.source().q[x]);
        std::vector<std::int64_t> ua(s.size()), ub(s.size());
        for (std::size_t x = 0; x < s.size(); ++x) {
            ua[x] = s[x] / a.target().q[x];
            ub[x] = s[x] / b.source().q[x];
        }
        sa = stack(a, Homo::identity(SpinSystem(a.source().space, ua), a.field()));
        sb = stack(b, Homo::identity(SpinSystem(a.source().space, ub), a.field()));
        pa = &*sa;
        pb = &*sb;
        if (pa->target() != pb->source())
            throw std::logic_error("compose: lcm stabilization failed to align systems");
    }
    const SpinSystem& src = pa->source();
    std::vector<std::vector<std::vector<Element>>> images(src.sites());
    for (int x = 0; x < src.sites(); ++x) {
        auto legs = prime_legs(src.dim(x));
        images[x].resize(legs.size());
        for (std::size_t t = 0; t < legs.size(); ++t)
            for (std::int64_t i = 0; i < legs[t]; ++i)
                for (std::int64_t j = 0; j < legs[t]; ++j)
                    images[x][t].push_back(apply(*pb, pa->leg_image(x, t, i, j)));
    }
    return Homo(src, pb->target(), pa->field(), std::move(images));
}

// Shift on the circle: every unit at site n goes to the same unit at
// site n + step (mod N). Requires a uniform system.
inline Homo translation(const SpinSystem& sys, int step, FieldTag field) {
    if (sys.space->kind() != MetricSpace::Kind::Circle)
        throw std::invalid_argument("translation: circle space required");
    for (auto d : sys.q)
        if (d != sys.q[0]) throw std::invalid_argument("translation: uniform system required");
    const int n = sys.sites();
    std::vector<std::vector<std::vector<Element>>> images(n);
    for (int x = 0; x < n; ++x) {
        auto legs = prime_legs(sys.dim(x));
        images[x].resize(legs.size());
        int y = ((x + step) % n + n) % n;
        for (std::size_t t = 0; t < legs.size(); ++t)
            for (std::int64_t i = 0; i < legs[t]; ++i)
                for (std::int64_t j = 0; j < legs[t]; ++j)
                    images[x][t].push_back(Element(sys, {y}, leg_unit_matrix(legs, t, i, j, field)));
    }
    return Homo(sys, sys, field, std::move(images));
}

// Sitewise exchange of the two Kronecker factors of a stacked system.
inline Homo swap_circuit(const SpinSystem& qsys, const SpinSystem& rsys, FieldTag field) {
    if (qsys.space != rsys.space) throw std::invalid_argument("swap: space mismatch");
    SpinSystem both = stack_systems(qsys, rsys);
    std::vector<std::vector<std::vector<Element>>> images(both.sites());
    for (int x = 0; x < both.sites(); ++x) {
        const std::int64_t qd = qsys.dim(x), rd = rsys.dim(x);
        auto legs = prime_legs(both.dim(x));
        images[x].resize(legs.size());
        // permutation sending i_q * rd + i_r to i_r * qd + i_q
        Mat p(static_cast<int>(qd * rd), static_cast<int>(qd * rd), field);
        for (std::int64_t iq = 0; iq < qd; ++iq)
            for (std::int64_t ir = 0; ir < rd; ++ir)
                p.at(static_cast<int>(ir * qd + iq), static_cast<int>(iq * rd + ir)) =
                    Scalar::one(field);
        Mat pt = p.transpose();
        for (std::size_t t = 0; t < legs.size(); ++t)
            for (std::int64_t i = 0; i < legs[t]; ++i)
                for (std::int64_t j = 0; j < legs[t]; ++j) {
                    Mat u = leg_unit_matrix(legs, t, i, j, field);
                    images[x][t].push_back(Element(both, {x}, p * u * pt));
                }
    }
    return Homo(both, both, field, std::move(images));
}

// The swap permutation on one site, exposed for the K1 parity analysis.
inline Mat swap_permutation_matrix(std::int64_t qd, std::int64_t rd, FieldTag field) {
    Mat p(static_cast<int>(qd * rd), static_cast<int>(qd * rd), field);
    for (std::int64_t iq = 0; iq < qd; ++iq)
        for (std::int64_t ir = 0; ir < rd; ++ir)
            p.at(static_cast<int>(ir * qd + iq), static_cast<int>(iq * rd + ir)) = Scalar::one(field);
    return p;
}

enum class GateKind { General, Inner, Special, Elementary, Permutation };

// One block of a single-layer circuit.
struct GateSpec {
    std::vector<int> block;  // ascending site ids
    GateKind kind = GateKind::Inner;
    Mat g;                           // conjugating matrix (all kinds but General may set it)
    std::vector<Mat> elementary_factors;  // witness for Elementary: g is their product
    std::vector<Mat> table;  // General: image of each block unit e_{ij}, row-major
};

namespace detail {

inline bool is_elementary_matrix(const Mat& e) {
    if (e.rows() != e.cols()) return false;
    int off = 0;
    for (int i = 0; i < e.rows(); ++i)
        for (int j = 0; j < e.cols(); ++j) {
            if (i == j) {
                if (!e.at(i, j).is_one()) return false;
            } else if (!e.at(i, j).is_zero()) {
                ++off;
            }
        }
    return off == 1;
}

inline bool is_permutation_matrix(const Mat& p) {
    if (p.rows() != p.cols()) return false;
    for (int i = 0; i < p.rows(); ++i) {
        int ones = 0;
        for (int j = 0; j < p.cols(); ++j) {
            if (p.at(i, j).is_one()) ++ones;
            else if (!p.at(i, j).is_zero()) return false;
        }
        if (ones != 1) return false;
    }
    for (int j = 0; j < p.cols(); ++j) {
        int ones = 0;
        for (int i = 0; i < p.rows(); ++i)
            if (p.at(i, j).is_one()) ++ones;
        if (ones != 1) return false;
    }
    return true;
}

// Skolem-Noether: recover the conjugating matrix of an automorphism given
// by its unit table.
inline Mat conjugator_from_table(std::int64_t n, FieldTag f, const std::vector<Mat>& table) {
    if (static_cast<std::int64_t>(table.size()) != n * n)
        throw std::invalid_argument("general gate: table must list all n^2 unit images");
    const int nn = static_cast<int>(n * n);
    // constraints g e_{ij} - t_{ij} g = 0, unknown vec(g)
    std::vector<Mat> rows;
    Mat stacked(nn * nn, nn, f);
    int r = 0;
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j) {
            const Mat& t = table[static_cast<std::size_t>(i * n + j)];
            // row block: for each entry (a,b) of the constraint matrix
            for (std::int64_t a = 0; a < n; ++a)
                for (std::int64_t b = 0; b < n; ++b) {
                    // (g e_{ij})(a,b) = g(a,i) [b == j]; (t g)(a,b) = sum_c t(a,c) g(c,b)
                    if (b == j) stacked.at(r, static_cast<int>(a * n + i)) +=
                        Scalar::one(f);
                    for (std::int64_t c = 0; c < n; ++c) {
                        const Scalar& tv = t.at(static_cast<int>(a), static_cast<int>(c));
                        if (!tv.is_zero()) stacked.at(r, static_cast<int>(c * n + b)) -= tv;
                    }
                    ++r;
                }
        }
    Mat null = nullspace(stacked);
    for (int k = 0; k < null.rows(); ++k) {
        Mat cand(static_cast<int>(n), static_cast<int>(n), f);
        for (std::int64_t a = 0; a < n; ++a)
            for (std::int64_t b = 0; b < n; ++b)
                cand.at(static_cast<int>(a), static_cast<int>(b)) =
                    null.at(k, static_cast<int>(a * n + b));
        if (is_invertible(cand)) return cand;
    }
    throw std::invalid_argument("general gate: table is not an automorphism");
}

}  // namespace detail

// Blockwise product of the gates over a partition of the space; the
// resulting automorphism has spread at most the largest block diameter.
inline Homo circuit_single_layer(const SpinSystem& sys, std::vector<GateSpec> layer,
                                 FieldTag field) {
    std::vector<int> covered(sys.sites(), 0);
    for (const auto& gate : layer)
        for (int s : gate.block) {
            if (s < 0 || s >= sys.sites()) throw std::invalid_argument("gate block site out of range");
            if (covered[s]++) throw std::invalid_argument("gate blocks overlap");
        }
    for (int s = 0; s < sys.sites(); ++s)
        if (!covered[s]) throw std::invalid_argument("gate blocks must partition the space");

    std::vector<std::vector<std::vector<Element>>> images(sys.sites());
    for (auto& gate : layer) {
        std::sort(gate.block.begin(), gate.block.end());
        const std::int64_t n = detail::window_dim(sys, gate.block);
        if (gate.kind == GateKind::General) {
            gate.g = detail::conjugator_from_table(n, field, gate.table);
        }
        if (gate.g.rows() != n || gate.g.cols() != n)
            throw std::invalid_argument("gate matrix must act on the block algebra");
        if (!is_invertible(gate.g)) throw std::invalid_argument("gate matrix not invertible");
        switch (gate.kind) {
            case GateKind::Special:
                if (!det_ff(gate.g).is_one())
                    throw std::invalid_argument("special gate must have determinant one");
                break;
            case GateKind::Elementary: {
                if (gate.elementary_factors.empty())
                    throw std::invalid_argument("elementary gate needs its factor witness");
                Mat prod = Mat::identity(static_cast<int>(n), field);
                for (const auto& e : gate.elementary_factors) {
                    if (!detail::is_elementary_matrix(e))
                        throw std::invalid_argument("elementary gate: factor is not elementary");
                    prod = prod * e;
                }
                if (prod != gate.g)
                    throw std::invalid_argument("elementary gate: factors do not multiply to g");
                break;
            }
            case GateKind::Permutation:
                if (!detail::is_permutation_matrix(gate.g))
                    throw std::invalid_argument("permutation gate: matrix is not a permutation");
                break;
            default:
                break;
        }
        Mat ginv = inverse(gate.g);
        for (int x : gate.block) {
            auto legs = prime_legs(sys.dim(x));
            images[x].resize(legs.size());
            for (std::size_t t = 0; t < legs.size(); ++t)
                for (std::int64_t i = 0; i < legs[t]; ++i)
                    for (std::int64_t j = 0; j < legs[t]; ++j) {
                        Element u(sys, {x}, leg_unit_matrix(legs, t, i, j, field));
                        Element in_block = embed(u, gate.block);
                        images[x][t].push_back(minimize_support(
                            Element(sys, gate.block, gate.g * in_block.matrix() * ginv)));
                    }
        }
    }
    return Homo(sys, sys, field, std::move(images));
}

// --- isomorphism checking -------------------------------------------------

struct IsoResult {
    bool is_iso = false;
    std::string failure;
    std::optional<Homo> inverse;
};

namespace detail {

// Strict shift detection: every leg image is a canonical leg unit of the
// target at a single site, with a consistent slot. Returns the slot map or
// nothing.
inline std::optional<std::map<std::pair<int, int>, std::pair<int, int>>> shift_slot_map(
    const Homo& h) {
    std::map<std::pair<int, int>, std::pair<int, int>> slots;
    std::map<std::pair<int, int>, int> used;  // target slots already taken
    const auto& src = h.source();
    for (int x = 0; x < src.sites(); ++x) {
        auto legs = prime_legs(src.dim(x));
        for (std::size_t t = 0; t < legs.size(); ++t) {
            const std::int64_t p = legs[t];
            const Element& probe = h.leg_image(x, t, 0, 0);
            if (probe.support().size() != 1) return std::nullopt;
            int y = probe.support()[0];
            auto tlegs = prime_legs(h.target().dim(y));
            int found = -1;
            for (std::size_t mu = 0; mu < tlegs.size() && found < 0; ++mu) {
                if (tlegs[mu] != p) continue;
                if (used.count({y, static_cast<int>(mu)})) continue;
                bool all = true;
                for (std::int64_t i = 0; i < p && all; ++i)
                    for (std::int64_t j = 0; j < p && all; ++j) {
                        Element want(h.target(), {y}, leg_unit_matrix(tlegs, mu, i, j, h.field()));
                        if (!elements_equal(h.leg_image(x, t, i, j), want)) all = false;
                    }
                if (all) found = static_cast<int>(mu);
            }
            if (found < 0) return std::nullopt;
            slots[{x, static_cast<int>(t)}] = {y, found};
            used[{y, found}] = 1;
        }
    }
    // onto: every target leg must be hit
    std::size_t target_legs = 0;
    for (int y = 0; y < h.target().sites(); ++y) target_legs += prime_legs(h.target().dim(y)).size();
    if (used.size() != target_legs) return std::nullopt;
    return slots;
}

}  // namespace detail

// Builds the shift with the given leg slot map: source leg (x, t) lands as
// the canonical leg slot (y, mu) of the target.
inline Homo shift_homo(const SpinSystem& source, const SpinSystem& target,
                       const std::map<std::pair<int, int>, std::pair<int, int>>& slot_map,
                       FieldTag field) {
    std::vector<std::vector<std::vector<Element>>> images(source.sites());
    for (int x = 0; x < source.sites(); ++x) {
        auto legs = prime_legs(source.dim(x));
        images[x].resize(legs.size());
        for (std::size_t t = 0; t < legs.size(); ++t) {
            auto it = slot_map.find({x, static_cast<int>(t)});
            if (it == slot_map.end()) throw std::invalid_argument("shift: leg without a slot");
            auto [y, mu] = it->second;
            auto tlegs = prime_legs(target.dim(y));
            if (tlegs.at(mu) != legs[t]) throw std::invalid_argument("shift: prime mismatch");
            for (std::int64_t i = 0; i < legs[t]; ++i)
                for (std::int64_t j = 0; j < legs[t]; ++j)
                    images[x][t].push_back(
                        Element(target, {y}, leg_unit_matrix(tlegs, mu, i, j, field)));
        }
    }
    return Homo(source, target, field, std::move(images));
}

// Decides invertibility and returns the inverse. Shifts invert
// combinatorially; otherwise each target unit gets a preimage solve over
// the spread window.
inline IsoResult is_isomorphism(const Homo& h) {
    IsoResult res;
    if (!verify(h).empty()) {
        res.failure = "verification failed";
        return res;
    }
    if (auto slots = detail::shift_slot_map(h)) {
        std::map<std::pair<int, int>, std::pair<int, int>> inv_map;
        for (const auto& [src_leg, dst_leg] : *slots) inv_map[dst_leg] = src_leg;
        res.is_iso = true;
        res.inverse = shift_homo(h.target(), h.source(), inv_map, h.field());
        return res;
    }
    const auto& space = *h.source().space;
    const Rational& ell = h.spread();
    std::vector<std::vector<std::vector<Element>>> inv_images(h.target().sites());
    for (int y = 0; y < h.target().sites(); ++y) {
        auto tlegs = prime_legs(h.target().dim(y));
        inv_images[y].resize(tlegs.size());
        if (tlegs.empty()) continue;
        std::vector<int> ball;
        for (int x = 0; x < space.size(); ++x)
            if (space.dist(x, y) <= ell) ball.push_back(x);
        std::int64_t bdim = detail::window_dim(h.source(), ball);
        std::vector<Element> basis_images;
        basis_images.reserve(static_cast<std::size_t>(bdim * bdim));
        std::vector<int> uni = ball;
        for (std::int64_t i = 0; i < bdim; ++i)
            for (std::int64_t j = 0; j < bdim; ++j) {
                Mat u(static_cast<int>(bdim), static_cast<int>(bdim), h.field());
                u.at(static_cast<int>(i), static_cast<int>(j)) = Scalar::one(h.field());
                Element img = apply(h, Element(h.source(), ball, std::move(u)));
                uni = sorted_union(uni, img.support());
                basis_images.push_back(std::move(img));
            }
        uni = sorted_union(uni, {y});
        std::int64_t adim = detail::window_dim(h.target(), uni);
        Mat cols(static_cast<int>(adim * adim), static_cast<int>(bdim * bdim), h.field());
        for (std::size_t k = 0; k < basis_images.size(); ++k) {
            Mat v = vec_row(embed(basis_images[k], uni).matrix());
            for (std::int64_t r = 0; r < adim * adim; ++r)
                cols.at(static_cast<int>(r), static_cast<int>(k)) = v.at(0, static_cast<int>(r));
        }
        std::int64_t n_units = 0;
        for (auto p : tlegs) n_units += p * p;
        Mat rhs(static_cast<int>(adim * adim), static_cast<int>(n_units), h.field());
        int col = 0;
        for (std::size_t mu = 0; mu < tlegs.size(); ++mu)
            for (std::int64_t i = 0; i < tlegs[mu]; ++i)
                for (std::int64_t j = 0; j < tlegs[mu]; ++j) {
                    Element u(h.target(), {y}, leg_unit_matrix(tlegs, mu, i, j, h.field()));
                    Mat v = vec_row(embed(u, uni).matrix());
                    for (std::int64_t r = 0; r < adim * adim; ++r)
                        rhs.at(static_cast<int>(r), col) = v.at(0, static_cast<int>(r));
                    ++col;
                }
        auto [ok, sol] = solve(cols, rhs);
        if (!ok) {
            res.failure = "no preimage for a matrix unit at site " + std::to_string(y);
            return res;
        }
        col = 0;
        for (std::size_t mu = 0; mu < tlegs.size(); ++mu) {
            for (std::int64_t i = 0; i < tlegs[mu]; ++i)
                for (std::int64_t j = 0; j < tlegs[mu]; ++j) {
                    Mat z(static_cast<int>(bdim), static_cast<int>(bdim), h.field());
                    for (std::int64_t k = 0; k < bdim * bdim; ++k)
                        z.at(static_cast<int>(k / bdim), static_cast<int>(k % bdim)) =
                            sol.at(static_cast<int>(k), col);
                    inv_images[y][mu].push_back(minimize_support(Element(h.source(), ball, std::move(z))));
                    ++col;
                }
        }
    }
    Homo inv(h.target(), h.source(), h.field(), std::move(inv_images));
    if (!verify(inv).empty()) {
        res.failure = "candidate inverse fails verification";
        return res;
    }
    res.is_iso = true;
    res.inverse = std::move(inv);
    return res;
}

}  // namespace qcalab
