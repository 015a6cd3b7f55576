#pragma once

#include <map>
#include <optional>
#include <queue>
#include <set>

#include "qcalab/qca.hpp"

namespace qcalab {

// Finitely supported map prime -> integer; zero entries are never stored.
class PrimeVector {
public:
    PrimeVector() = default;

    static PrimeVector valuations(std::int64_t n) {
        PrimeVector v;
        for (auto p : prime_legs(n)) v.add(p, 1);
        return v;
    }

    void add(std::int64_t prime, std::int64_t amount) {
        if (amount == 0) return;
        auto it = e_.find(prime);
        if (it == e_.end()) {
            e_.emplace(prime, amount);
        } else {
            it->second += amount;
            if (it->second == 0) e_.erase(it);
        }
    }

    std::int64_t at(std::int64_t prime) const {
        auto it = e_.find(prime);
        return it == e_.end() ? 0 : it->second;
    }

    bool is_zero() const { return e_.empty(); }
    const std::map<std::int64_t, std::int64_t>& entries() const { return e_; }

    PrimeVector& operator+=(const PrimeVector& o) {
        for (auto [p, n] : o.e_) add(p, n);
        return *this;
    }
    PrimeVector& operator-=(const PrimeVector& o) {
        for (auto [p, n] : o.e_) add(p, -n);
        return *this;
    }
    friend PrimeVector operator+(PrimeVector a, const PrimeVector& b) { return a += b; }
    friend PrimeVector operator-(PrimeVector a, const PrimeVector& b) { return a -= b; }
    bool operator==(const PrimeVector&) const = default;

private:
    std::map<std::int64_t, std::int64_t> e_;
};

// Finitely supported 0-chain with prime-vector coefficients.
class Chain0 {
public:
    Chain0() = default;

    void add(int site, const PrimeVector& v) {
        if (v.is_zero()) return;
        auto it = c_.find(site);
        if (it == c_.end()) {
            c_.emplace(site, v);
        } else {
            it->second += v;
            if (it->second.is_zero()) c_.erase(it);
        }
    }
    void add(int site, std::int64_t prime, std::int64_t amount) {
        PrimeVector v;
        v.add(prime, amount);
        add(site, v);
    }

    PrimeVector at(int site) const {
        auto it = c_.find(site);
        return it == c_.end() ? PrimeVector() : it->second;
    }

    bool is_zero() const { return c_.empty(); }
    const std::map<int, PrimeVector>& entries() const { return c_; }

    Chain0& operator+=(const Chain0& o) {
        for (const auto& [s, v] : o.c_) add(s, v);
        return *this;
    }
    Chain0& operator-=(const Chain0& o) {
        for (const auto& [s, v] : o.c_) {
            PrimeVector neg;
            neg -= v;
            add(s, neg);
        }
        return *this;
    }
    friend Chain0 operator+(Chain0 a, const Chain0& b) { return a += b; }
    friend Chain0 operator-(Chain0 a, const Chain0& b) { return a -= b; }
    bool operator==(const Chain0&) const = default;

    PrimeVector total() const {
        PrimeVector t;
        for (const auto& [s, v] : c_) t += v;
        return t;
    }

private:
    std::map<int, PrimeVector> c_;
};

// 1-chain of ordered site pairs with a propagation bound l; stored pairs
// must satisfy d(x0, x1) <= 2l (the l-neighborhood of the diagonal in the
// L-infinity square).
class Chain1 {
public:
    Chain1() = default;
    explicit Chain1(Rational bound) : bound_(std::move(bound)) {}

    const Rational& bound() const { return bound_; }

    void add(int x0, int x1, const PrimeVector& v) {
        if (v.is_zero()) return;
        auto key = std::make_pair(x0, x1);
        auto it = c_.find(key);
        if (it == c_.end()) {
            c_.emplace(key, v);
        } else {
            it->second += v;
            if (it->second.is_zero()) c_.erase(it);
        }
    }

    const std::map<std::pair<int, int>, PrimeVector>& entries() const { return c_; }
    bool is_zero() const { return c_.empty(); }

    bool respects_bound(const MetricSpace& space) const {
        for (const auto& [pair, v] : c_)
            if (space.dist(pair.first, pair.second) > 2 * bound_) return false;
        return true;
    }

private:
    Rational bound_{0};
    std::map<std::pair<int, int>, PrimeVector> c_;
};

// d(n [x0, x1]) = n [x1] - n [x0], extended linearly.
inline Chain0 boundary(const Chain1& c) {
    Chain0 out;
    for (const auto& [pair, v] : c.entries()) {
        out.add(pair.second, v);
        PrimeVector neg;
        neg -= v;
        out.add(pair.first, neg);
    }
    return out;
}

// Sitewise p-adic valuations of the dimension function, over all primes.
inline Chain0 deg(const SpinSystem& q) {
    Chain0 out;
    for (int x = 0; x < q.sites(); ++x) out.add(x, PrimeVector::valuations(q.dim(x)));
    return out;
}

// The full coarse class of a system on a bounded space: the total degree.
inline PrimeVector ch0_bounded(const SpinSystem& q) { return deg(q).total(); }

// --- the l-homologous decision ---------------------------------------------

struct Obstruction {
    std::int64_t prime = 0;
    std::vector<int> component;
    std::int64_t sum_a = 0;
    std::int64_t sum_b = 0;
};

struct LHomologousResult {
    bool homologous = false;
    Chain1 certificate;
    std::optional<Obstruction> obstruction;
};

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
    int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace detail

// a - b bounds a 1-chain with bound l iff every prime's mass agrees on
// every connected component of the threshold graph G_l (edges at distance
// <= l). On success the certificate routes the difference along spanning
// trees of the components.
inline LHomologousResult l_homologous(const Chain0& a, const Chain0& b, const Rational& l,
                                      const SpacePtr& space) {
    const int n = space->size();
    detail::UnionFind uf(n);
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
            if (space->dist(x, y) <= l) uf.unite(x, y);

    Chain0 diff = a - b;
    LHomologousResult res;
    // component sums per prime must vanish on the difference
    std::map<std::pair<int, std::int64_t>, std::int64_t> comp_sums;
    for (const auto& [site, v] : diff.entries())
        for (auto [p, c] : v.entries()) comp_sums[{uf.find(site), p}] += c;
    for (const auto& [key, sum] : comp_sums) {
        if (sum == 0) continue;
        Obstruction ob;
        ob.prime = key.second;
        for (int x = 0; x < n; ++x)
            if (uf.find(x) == key.first) ob.component.push_back(x);
        std::int64_t asum = 0, bsum = 0;
        for (int x : ob.component) {
            asum += a.at(x).at(ob.prime);
            bsum += b.at(x).at(ob.prime);
        }
        ob.sum_a = asum;
        ob.sum_b = bsum;
        res.obstruction = std::move(ob);
        return res;
    }

    // spanning forest preferring short edges, then push the subtree excess
    // across each tree edge
    std::vector<std::pair<Rational, std::pair<int, int>>> edges;
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
            if (space->dist(x, y) <= l) edges.push_back({space->dist(x, y), {x, y}});
    std::sort(edges.begin(), edges.end());
    detail::UnionFind forest(n);
    std::vector<std::vector<int>> adj(n);
    for (const auto& [d, e] : edges)
        if (forest.find(e.first) != forest.find(e.second)) {
            forest.unite(e.first, e.second);
            adj[e.first].push_back(e.second);
            adj[e.second].push_back(e.first);
        }
    std::vector<int> parent(n, -1), order;
    std::vector<bool> seen(n, false);
    for (int root = 0; root < n; ++root) {
        if (seen[root]) continue;
        seen[root] = true;
        std::queue<int> bfs;
        bfs.push(root);
        while (!bfs.empty()) {
            int x = bfs.front();
            bfs.pop();
            order.push_back(x);
            for (int y : adj[x])
                if (!seen[y]) {
                    seen[y] = true;
                    parent[y] = x;
                    bfs.push(y);
                }
        }
    }
    Chain1 cert(l);
    std::vector<PrimeVector> excess(n);
    for (const auto& [site, v] : diff.entries()) excess[site] += v;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int v = *it;
        if (parent[v] < 0) continue;  // component root keeps the (zero) total
        if (!excess[v].is_zero()) {
            cert.add(parent[v], v, excess[v]);
            excess[parent[v]] += excess[v];
            excess[v] = PrimeVector();
        }
    }
    res.homologous = true;
    res.certificate = std::move(cert);
    return res;
}

// --- coarse chains of arbitrary degree on finite spaces ---------------------

// Degree-n chain: integer coefficients on (n+1)-tuples of sites.
struct ChainN {
    int degree = 0;
    Rational propagation{0};
    std::map<std::vector<int>, Integer> coeffs;

    void add(const std::vector<int>& tuple, const Integer& c) {
        if (c == 0) return;
        auto it = coeffs.find(tuple);
        if (it == coeffs.end()) {
            coeffs.emplace(tuple, c);
        } else {
            it->second += c;
            if (it->second == 0) coeffs.erase(it);
        }
    }
};

// Alternating sum over omitted entries.
inline ChainN boundary_n(const ChainN& c) {
    ChainN out;
    out.degree = c.degree - 1;
    out.propagation = c.propagation;
    if (c.degree == 0) return out;  // boundary of a 0-chain is zero
    for (const auto& [tuple, coeff] : c.coeffs) {
        for (std::size_t i = 0; i < tuple.size(); ++i) {
            std::vector<int> face;
            for (std::size_t k = 0; k < tuple.size(); ++k)
                if (k != i) face.push_back(tuple[k]);
            out.add(face, (i % 2 == 0) ? coeff : Integer(-coeff));
        }
    }
    return out;
}

struct HomologyGroup {
    std::int64_t free_rank = 0;
    std::vector<Integer> torsion;  // elementary divisors > 1

    bool is_trivial() const { return free_rank == 0 && torsion.empty(); }
    bool is_free_of_rank(std::int64_t r) const { return free_rank == r && torsion.empty(); }
};

namespace detail {

// Smith normal form rank and elementary divisors of an integer matrix.
inline std::pair<std::int64_t, std::vector<Integer>> smith_normal_form(
    std::vector<std::vector<Integer>> m) {
    std::vector<Integer> divisors;
    std::size_t rows = m.size();
    std::size_t cols = rows ? m[0].size() : 0;
    std::size_t r = 0, c = 0;
    auto abs_val = [](const Integer& v) { return v < 0 ? Integer(-v) : v; };
    while (r < rows && c < cols) {
        // locate the nonzero entry of least magnitude in the remaining block
        std::size_t pi = r, pj = c;
        Integer best = 0;
        for (std::size_t i = r; i < rows; ++i)
            for (std::size_t j = c; j < cols; ++j)
                if (m[i][j] != 0 && (best == 0 || abs_val(m[i][j]) < best)) {
                    best = abs_val(m[i][j]);
                    pi = i;
                    pj = j;
                }
        if (best == 0) break;
        std::swap(m[r], m[pi]);
        for (std::size_t i = 0; i < rows; ++i) std::swap(m[i][c], m[i][pj]);
        bool clean = true;
        for (std::size_t i = r + 1; i < rows; ++i)
            if (m[i][c] != 0) {
                Integer q = m[i][c] / m[r][c];
                for (std::size_t j = c; j < cols; ++j) m[i][j] -= q * m[r][j];
                if (m[i][c] != 0) clean = false;
            }
        for (std::size_t j = c + 1; j < cols; ++j)
            if (m[r][j] != 0) {
                Integer q = m[r][j] / m[r][c];
                for (std::size_t i = r; i < rows; ++i) m[i][j] -= q * m[i][c];
                if (m[r][j] != 0) clean = false;
            }
        if (!clean) continue;  // smaller pivot surfaced, repeat this position
        divisors.push_back(abs_val(m[r][c]));
        ++r;
        ++c;
    }
    std::sort(divisors.begin(), divisors.end());
    return {static_cast<std::int64_t>(divisors.size()), divisors};
}

inline std::vector<std::vector<int>> all_tuples(int sites, int len) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(len, 0);
    if (len == 0) return out;
    for (;;) {
        out.push_back(cur);
        int k = len - 1;
        while (k >= 0 && ++cur[k] == sites) cur[k--] = 0;
        if (k < 0) break;
    }
    return out;
}

// Integer matrix of the boundary operator from degree k to k-1.
inline std::vector<std::vector<Integer>> boundary_matrix(int sites, int k) {
    auto domain = all_tuples(sites, k + 1);
    auto target = all_tuples(sites, k);
    std::map<std::vector<int>, std::size_t> index_of;
    for (std::size_t i = 0; i < target.size(); ++i) index_of[target[i]] = i;
    std::vector<std::vector<Integer>> m(target.size(),
                                        std::vector<Integer>(domain.size(), Integer(0)));
    for (std::size_t j = 0; j < domain.size(); ++j)
        for (int i = 0; i <= k; ++i) {
            std::vector<int> face;
            for (int t = 0; t <= k; ++t)
                if (t != i) face.push_back(domain[j][t]);
            m[index_of[face]][j] += (i % 2 == 0) ? 1 : -1;
        }
    return m;
}

}  // namespace detail

// CH_n of a finite space: on a finite space every tuple is within
// propagation, so this is the homology of the full chain complex.
inline HomologyGroup ch_n_finite(const SpacePtr& space, int n, int degree_cap = 3) {
    if (n < 0) throw std::invalid_argument("ch_n_finite: negative degree");
    if (n > degree_cap)
        throw std::invalid_argument("ch_n_finite: degree beyond the configured cap");
    const int sites = space->size();
    HomologyGroup h;
    if (sites == 0) return h;  // zero in every degree
    std::int64_t dim_cn = 1;
    for (int k = 0; k <= n; ++k) dim_cn *= sites;
    std::int64_t rank_dn = 0;
    if (n > 0) {
        auto [rank, div] = detail::smith_normal_form(detail::boundary_matrix(sites, n));
        rank_dn = rank;
    }
    auto [rank_dn1, divisors] = detail::smith_normal_form(detail::boundary_matrix(sites, n + 1));
    h.free_rank = (dim_cn - rank_dn) - rank_dn1;
    for (const auto& d : divisors)
        if (d > 1) h.torsion.push_back(d);
    return h;
}

// --- bridge to the QCA picture ----------------------------------------------

// Builds a shift realizing the certificate's transport: prime legs move
// along the certificate's edges, relaying through resting legs where
// possible. Requires deg(q) - deg(r) = boundary(certificate).
inline Homo shift_from_certificate(const SpinSystem& q, const SpinSystem& r,
                                   const Chain1& cert, FieldTag field) {
    if (q.space != r.space) throw std::invalid_argument("shift_from_certificate: space mismatch");
    const int n = q.sites();
    std::map<std::int64_t, std::map<std::pair<int, int>, std::int64_t>> flows;
    std::set<std::int64_t> primes;
    for (const auto& [pair, v] : cert.entries())
        for (auto [p, c] : v.entries()) {
            // c units of [x0, x1] put +c of (deg q - deg r) at x1, so the
            // surplus legs travel x1 -> x0
            if (c > 0) flows[p][{pair.second, pair.first}] += c;
            else       flows[p][{pair.first, pair.second}] += -c;
            primes.insert(p);
        }
    for (int x = 0; x < n; ++x)
        for (auto p : prime_legs(q.dim(x))) primes.insert(p);

    std::map<int, std::vector<std::pair<std::int64_t, std::pair<int, int>>>> arrivals;
    for (std::int64_t p : primes) {
        // leg tokens per site, identified by their canonical source slot
        std::vector<std::vector<std::pair<int, int>>> position(n);
        for (int x = 0; x < n; ++x) {
            auto legs = prime_legs(q.dim(x));
            for (std::size_t t = 0; t < legs.size(); ++t)
                if (legs[t] == p) position[x].push_back({x, static_cast<int>(t)});
        }
        // walk flow edges; a resting leg relays for one that already moved
        auto fl = flows.count(p) ? flows[p] : std::map<std::pair<int, int>, std::int64_t>{};
        std::map<std::pair<int, int>, bool> moved;
        bool progress = true;
        while (progress) {
            progress = false;
            for (auto& [edge, count] : fl) {
                auto [from, to] = edge;
                while (count > 0 && !position[from].empty()) {
                    auto& stack = position[from];
                    std::size_t pick = stack.size();
                    for (std::size_t k = 0; k < stack.size(); ++k)
                        if (!moved[stack[k]]) { pick = k; break; }
                    if (pick == stack.size()) pick = stack.size() - 1;
                    auto leg = stack[pick];
                    stack.erase(stack.begin() + static_cast<std::ptrdiff_t>(pick));
                    moved[leg] = true;
                    position[to].push_back(leg);
                    --count;
                    progress = true;
                }
            }
        }
        for (auto& [edge, count] : fl)
            if (count > 0)
                throw std::invalid_argument("shift_from_certificate: flow not realizable by legs");
        for (int y = 0; y < n; ++y) {
            std::sort(position[y].begin(), position[y].end());
            for (const auto& leg : position[y]) arrivals[y].push_back({p, leg});
        }
    }
    std::map<std::pair<int, int>, std::pair<int, int>> final_map;
    for (int y = 0; y < n; ++y) {
        auto tlegs = prime_legs(r.dim(y));
        auto& incoming = arrivals[y];
        std::sort(incoming.begin(), incoming.end());
        if (incoming.size() != tlegs.size())
            throw std::invalid_argument("shift_from_certificate: leg counts disagree with r");
        for (std::size_t mu = 0; mu < tlegs.size(); ++mu) {
            if (incoming[mu].first != tlegs[mu])
                throw std::invalid_argument("shift_from_certificate: prime mismatch at a slot");
            final_map[incoming[mu].second] = {y, static_cast<int>(mu)};
        }
    }
    return shift_homo(q, r, final_map, field);
}

}  // namespace qcalab
