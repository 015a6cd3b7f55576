#pragma once

#include <cmath>
#include <map>

#include "qcalab/qca.hpp"

namespace qcalab {

// A directed cut of an interval or circle: the edge between site gamma and
// site gamma+1, studied through windows of the given radius.
struct Cut {
    int gamma = 0;
    int radius = 1;
};

namespace detail {

// Sites (gamma+lo, gamma+hi] in the linear order of the space; wraps on a
// circle, clips to the site range on an interval.
inline std::vector<int> cut_range(const MetricSpace& space, int gamma, int lo, int hi) {
    std::vector<int> out;
    const int n = space.size();
    if (hi - lo > n) throw std::invalid_argument("cut window longer than the space");
    for (int k = lo + 1; k <= hi; ++k) {
        int s = gamma + k;
        if (space.kind() == MetricSpace::Kind::Circle) {
            out.push_back(((s % n) + n) % n);
        } else if (s >= 0 && s < n) {
            out.push_back(s);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline void check_cut(const Homo& h, const Cut& c) {
    const MetricSpace& space = *h.source().space;
    if (!space.is_linear())
        throw std::invalid_argument("index: cuts require an interval or circle space");
    if (c.radius < 1) throw std::invalid_argument("index: window radius must be >= 1");
    if (h.spread() > c.radius)
        throw std::invalid_argument("index: spread exceeds the window radius");
    const int n = space.size();
    if (space.kind() == MetricSpace::Kind::Circle) {
        if (4 * c.radius > n)
            throw std::invalid_argument("index: window spans too much of the circle");
        if (c.gamma < 0 || c.gamma >= n) throw std::invalid_argument("index: cut out of range");
    } else {
        if (c.gamma - c.radius + 1 < 0 || c.gamma + 2 * c.radius > n - 1)
            throw std::invalid_argument("index: window leaves the interval");
    }
}

inline std::int64_t isqrt64(std::int64_t v) {
    std::int64_t r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
    while (r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return r;
}

constexpr std::int64_t kDenseWindowCap = 256;    // q(W) cap for the dense route
constexpr std::int64_t kDenseBasisCap = 4096;    // starting basis cap for phase 2
constexpr std::int64_t kCertifyWindowCap = 64;   // q(W) cap for dense pair certificates

}  // namespace detail

struct IndexCertificates {
    bool dim_is_square = false;
    bool pair_checked = false;
    TensorPairCertificate pair;
    bool replacement_checked = false;
    bool replacement_ok = false;
    bool factored_route = false;
};

// The K0(Az) class of alpha at a cut: the reduced fraction d/m together
// with the boundary algebra it came from.
struct AzClass {
    Rational value;        // d/m in lowest terms
    std::int64_t dim_b = 0;
    std::int64_t d = 0;
    std::int64_t m = 0;
    FieldTag field;
    Subalgebra boundary;
    IndexCertificates certs;
};

namespace detail {

// g = sum_P u_P (x) G_P over the units u_P of the out-of-window part;
// commuting with g inside A(U) is commuting with every window coefficient
// G_P.
inline std::vector<Mat> window_coefficients(const Element& g, const std::vector<int>& window,
                                            const SpinSystem& tgt) {
    std::vector<int> u = sorted_union(window, g.support());
    Element ge = embed(g, u);
    auto dims = ge.support_dims();
    std::vector<bool> in_w(u.size());
    for (std::size_t k = 0; k < u.size(); ++k)
        in_w[k] = std::binary_search(window.begin(), window.end(), u[k]);
    std::vector<std::int64_t> wdims, odims;
    for (std::size_t k = 0; k < u.size(); ++k)
        (in_w[k] ? wdims : odims).push_back(dims[k]);
    std::int64_t wd = 1, od = 1;
    for (auto d : wdims) wd *= d;
    for (auto d : odims) od *= d;
    std::map<std::pair<std::int64_t, std::int64_t>, Mat> coeffs;
    std::vector<std::int64_t> di, dj, wi, wj, oi, oj;
    for (std::int64_t r = 0; r < ge.window_dim(); ++r) {
        decode_index(r, dims, di);
        for (std::int64_t c = 0; c < ge.window_dim(); ++c) {
            const Scalar& v = ge.matrix().at(static_cast<int>(r), static_cast<int>(c));
            if (v.is_zero()) continue;
            decode_index(c, dims, dj);
            wi.clear(); wj.clear(); oi.clear(); oj.clear();
            for (std::size_t k = 0; k < u.size(); ++k) {
                if (in_w[k]) { wi.push_back(di[k]); wj.push_back(dj[k]); }
                else         { oi.push_back(di[k]); oj.push_back(dj[k]); }
            }
            auto key = std::make_pair(encode_index(oi, odims), encode_index(oj, odims));
            auto it = coeffs.find(key);
            if (it == coeffs.end())
                it = coeffs.emplace(key, Mat(static_cast<int>(wd), static_cast<int>(wd),
                                             g.field())).first;
            it->second.at(static_cast<int>(encode_index(wi, wdims)),
                          static_cast<int>(encode_index(wj, wdims))) += v;
        }
    }
    (void)tgt; (void)od;
    std::vector<Mat> out;
    for (auto& [key, m] : coeffs)
        if (!m.is_zero()) out.push_back(std::move(m));
    return out;
}

}  // namespace detail

// The boundary algebra at a cut: everything in the target window
// commuting with the images of all matrix units at the 2l sites right of
// the cut. One local linear system; when the automorphism is shift-like
// (all constraints single-site after support minimization) the commutant
// factorizes sitewise and is computed per site.
inline std::pair<Subalgebra, IndexCertificates> boundary_algebra(const Homo& h, const Cut& c) {
    detail::check_cut(h, c);
    const MetricSpace& space = *h.source().space;
    const SpinSystem& tgt = h.target();
    FieldTag f = h.field();
    const int ell = c.radius;
    std::vector<int> window = detail::cut_range(space, c.gamma, -ell, ell);
    std::vector<int> right = detail::cut_range(space, c.gamma, 0, 2 * ell);

    std::vector<const Element*> constraints;
    for (int s : right) {
        auto legs = prime_legs(h.source().dim(s));
        for (std::size_t t = 0; t < legs.size(); ++t)
            for (std::int64_t k = 0; k < legs[t] * legs[t]; ++k) {
                const Element& g = h.leg_image(s, t, k / legs[t], k % legs[t]);
                bool touches = false;
                for (int y : g.support())
                    if (std::binary_search(window.begin(), window.end(), y)) { touches = true; break; }
                if (touches) constraints.push_back(&g);
            }
    }

    bool all_single = true;
    for (const Element* g : constraints)
        if (g->support().size() != 1) { all_single = false; break; }

    IndexCertificates certs;
    Subalgebra b;
    if (all_single) {
        certs.factored_route = true;
        std::vector<Subspace> site_spaces;
        for (int w : window) {
            std::vector<Mat> gens;
            for (const Element* g : constraints)
                if (g->support()[0] == w) gens.push_back(g->matrix());
            site_spaces.push_back(
                matrix_commutant(static_cast<int>(tgt.dim(w)), f, gens));
        }
        b = Subalgebra::factored(tgt, window, std::move(site_spaces));
    } else {
        std::int64_t wd = detail::window_dim(tgt, window);
        if (wd > detail::kDenseWindowCap)
            throw std::runtime_error("boundary_algebra: window too large for the dense route");
        // phase 1: single-site constraints, solved per site
        std::vector<Subspace> site_spaces;
        for (int w : window) {
            std::vector<Mat> gens;
            for (const Element* g : constraints)
                if (g->support().size() == 1 && g->support()[0] == w) gens.push_back(g->matrix());
            site_spaces.push_back(matrix_commutant(static_cast<int>(tgt.dim(w)), f, gens));
        }
        Subalgebra phase1 = Subalgebra::factored(tgt, window, std::move(site_spaces));
        if (phase1.dim() > detail::kDenseBasisCap)
            throw std::runtime_error("boundary_algebra: intermediate basis too large");
        Subspace start = phase1.densify().space();
        // phase 2: multi-site constraints reduced to window coefficients
        std::vector<Mat> gens;
        for (const Element* g : constraints)
            if (g->support().size() > 1)
                for (auto& coeff : detail::window_coefficients(*g, window, tgt))
                    gens.push_back(std::move(coeff));
        Subspace space_b = matrix_commutant(static_cast<int>(wd), f, gens, start);
        b = Subalgebra::dense(tgt, window, std::move(space_b));
    }

    std::int64_t dim_b = b.dim();
    std::int64_t root = detail::isqrt64(dim_b);
    certs.dim_is_square = root * root == dim_b;

    if (certs.factored_route || b.window_dim() <= detail::kCertifyWindowCap) {
        certs.pair_checked = true;
        certs.pair = verify_tensor_pair(b, centralizer(b));
    }

    // replacement containment: images of units at the 2l sites left of the
    // cut lie in A(left of the window) (x) B
    certs.replacement_checked = true;
    certs.replacement_ok = true;
    std::vector<int> left_sources = detail::cut_range(space, c.gamma, -2 * ell, 0);
    std::vector<int> left_region = detail::cut_range(space, c.gamma, -3 * ell, -ell);
    for (int s : left_sources) {
        auto legs = prime_legs(h.source().dim(s));
        for (std::size_t t = 0; t < legs.size() && certs.replacement_ok; ++t)
            for (std::int64_t k = 0; k < legs[t] * legs[t] && certs.replacement_ok; ++k) {
                const Element& z = h.leg_image(s, t, k / legs[t], k % legs[t]);
                std::vector<int> in_window, outside;
                for (int y : z.support())
                    (std::binary_search(window.begin(), window.end(), y) ? in_window : outside)
                        .push_back(y);
                for (int y : outside)
                    if (!std::binary_search(left_region.begin(), left_region.end(), y))
                        certs.replacement_ok = false;
                if (!certs.replacement_ok) break;
                if (in_window.empty()) continue;
                if (outside.empty()) {
                    if (!b.contains(z)) certs.replacement_ok = false;
                } else if (b.is_factored() || b.window_dim() <= detail::kCertifyWindowCap) {
                    // split off the left legs; every window coefficient must lie in B
                    for (auto& coeff : detail::window_coefficients(z, window, tgt)) {
                        Element ce(tgt, window, std::move(coeff));
                        if (!b.contains(ce)) { certs.replacement_ok = false; break; }
                    }
                }
            }
        if (!certs.replacement_ok) break;
    }

    return {std::move(b), certs};
}

// The class d/m of Theorem b: d^2 = dim B, m the source dimension of the
// window stretch (gamma-l, gamma].
inline AzClass index(const Homo& h, const Cut& c) {
    auto [b, certs] = boundary_algebra(h, c);
    AzClass out;
    out.dim_b = b.dim();
    out.d = detail::isqrt64(out.dim_b);
    if (!certs.dim_is_square)
        throw std::runtime_error("index: boundary algebra dimension is not a perfect square");
    out.m = 1;
    for (int s : detail::cut_range(*h.source().space, c.gamma, -c.radius, 0))
        out.m *= h.source().dim(s);
    out.value = Rational(out.d, out.m);
    out.field = h.field();
    out.boundary = std::move(b);
    out.certs = certs;
    return out;
}

// The alternating-cell pump of the surjectivity construction, realized on
// an interval as a pure prime-leg shift: at every inner site the legs of
// the A-factor Mat(k^a) hop one step right and the legs of the B-factor
// Mat(k^b) hop one step left; the outermost legs stay put, which caps the
// transport and fattens the two end sites of the target system.
inline Homo pump(std::int64_t a, std::int64_t b, const SpacePtr& space, FieldTag field) {
    if (a < 1 || b < 1) throw std::invalid_argument("pump: factors must be >= 1");
    if (space->kind() != MetricSpace::Kind::Interval)
        throw std::invalid_argument("pump: interval space required");
    const int n = space->size();
    if (n < 3) throw std::invalid_argument("pump: window too short (need at least three cells)");
    SpinSystem source = SpinSystem::uniform(space, a * b);
    // classify the canonical legs of ab: per prime, the first v_p(a) legs
    // move right with the A factor, the rest move left with B
    auto legs = prime_legs(a * b);
    std::vector<bool> is_a(legs.size());
    {
        auto alegs = prime_legs(a);
        std::map<std::int64_t, std::int64_t> remaining;
        for (auto p : alegs) remaining[p]++;
        for (std::size_t t = 0; t < legs.size(); ++t) {
            auto it = remaining.find(legs[t]);
            if (it != remaining.end() && it->second > 0) {
                is_a[t] = true;
                it->second--;
            }
        }
    }
    // arrivals per target site, sorted by (prime, origin site, origin leg)
    std::map<int, std::vector<std::tuple<std::int64_t, int, int>>> arrivals;
    for (int x = 0; x < n; ++x)
        for (std::size_t t = 0; t < legs.size(); ++t) {
            int y;
            if (is_a[t]) y = (x < n - 1) ? x + 1 : x;
            else         y = (x > 0) ? x - 1 : x;
            arrivals[y].emplace_back(legs[t], x, static_cast<int>(t));
        }
    std::vector<std::int64_t> r(n, 1);
    std::map<std::pair<int, int>, std::pair<int, int>> slot_map;
    for (auto& [y, list] : arrivals) {
        std::sort(list.begin(), list.end());
        for (std::size_t mu = 0; mu < list.size(); ++mu) {
            auto [p, x, t] = list[mu];
            r[y] *= p;
            slot_map[{x, t}] = {y, static_cast<int>(mu)};
        }
    }
    SpinSystem target(space, std::move(r));
    return shift_homo(source, target, slot_map, field);
}

struct MultiplicativityCertificate {
    Rational lhs;  // index of the composition
    Rational rhs;  // product of the factor indexes
    bool holds = false;
};

// index(beta after alpha) = index(beta) * index(alpha), exact.
inline MultiplicativityCertificate check_homomorphism(const Homo& alpha, const Homo& beta,
                                                      const Cut& c) {
    Homo comp = compose(beta, alpha);
    MultiplicativityCertificate cert;
    cert.lhs = index(comp, c).value;
    Cut factor_cut{c.gamma, c.radius};
    cert.rhs = index(alpha, factor_cut).value * index(beta, factor_cut).value;
    cert.holds = cert.lhs == cert.rhs;
    return cert;
}

}  // namespace qcalab
