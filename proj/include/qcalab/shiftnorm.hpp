#pragma once

#include <set>

#include "qcalab/qca.hpp"

namespace qcalab {

// One hyperedge per p-leg of the source: the minimized support of the
// image of that leg's embedded Mat(k^p).
struct HyperEdge {
    int origin_site = 0;
    int origin_leg = 0;
    std::vector<int> support;
};

// The per-prime combinatorics of a locality-preserving isomorphism.
struct Hypergraph {
    std::int64_t prime = 0;
    SpinSystem source, target;
    std::vector<HyperEdge> edges;
    std::vector<std::int64_t> demand;  // b_x = v_p(target dim at x)
    Rational radius;                   // all edges within this distance of their origin
};

inline std::int64_t prime_valuation(std::int64_t n, std::int64_t p) {
    std::int64_t v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

// Builds the hypergraph of one prime and certifies the counting facts the
// assignment induction relies on: edges stay in the spread ball of their
// origin, every site sees at least its demand, and every edge touches a
// site with positive demand.
inline Hypergraph build_hypergraph(const Homo& h, std::int64_t p) {
    Hypergraph g;
    g.prime = p;
    g.source = h.source();
    g.target = h.target();
    g.radius = h.spread();
    const int n = g.source.sites();
    g.demand.resize(n);
    for (int x = 0; x < n; ++x) g.demand[x] = prime_valuation(g.target.dim(x), p);
    for (int x = 0; x < n; ++x) {
        auto legs = prime_legs(g.source.dim(x));
        for (std::size_t t = 0; t < legs.size(); ++t) {
            if (legs[t] != p) continue;
            std::vector<int> sup;
            for (std::int64_t i = 0; i < p; ++i)
                for (std::int64_t j = 0; j < p; ++j)
                    sup = sorted_union(sup, h.leg_image(x, t, i, j).support());
            if (sup.empty()) sup = {x};  // image is scalar only for p = 1, never here
            for (int y : sup)
                if (g.source.space->dist(x, y) > g.radius)
                    throw std::runtime_error("hypergraph: edge escapes the spread ball");
            g.edges.push_back(HyperEdge{x, static_cast<int>(t), std::move(sup)});
        }
    }
    std::vector<std::int64_t> incidence(n, 0);
    for (const auto& e : g.edges)
        for (int y : e.support) ++incidence[y];
    for (int x = 0; x < n; ++x)
        if (incidence[x] < g.demand[x])
            throw std::runtime_error("hypergraph: a site sees fewer edges than its demand");
    for (const auto& e : g.edges) {
        bool touches = false;
        for (int y : e.support)
            if (g.demand[y] > 0) { touches = true; break; }
        if (!touches) throw std::runtime_error("hypergraph: an edge misses every demanding site");
    }
    return g;
}

// edge index -> assigned site, plus whatever could not be placed.
struct Assignment {
    std::vector<int> site_of_edge;  // -1 when unassigned
    std::vector<int> residual;

    bool complete() const { return residual.empty(); }
};

// The greedy induction of the replacement proof: sites in ascending order,
// exhausting first the edges whose active intersection is the site alone,
// then the edges relieving overloaded neighbors, then anything that keeps
// every remaining site's count above its demand. Ties break by lowest edge
// id. Infeasibility is an error: it signals a non-isomorphism or
// unminimized supports.
inline Assignment assign(const Hypergraph& g) {
    const int n = g.source.sites();
    Assignment out;
    out.site_of_edge.assign(g.edges.size(), -1);
    std::vector<std::int64_t> remaining_demand = g.demand;
    std::set<int> active;  // Lambda: sites still demanding
    for (int x = 0; x < n; ++x)
        if (g.demand[x] > 0) active.insert(x);

    auto active_intersection = [&](const HyperEdge& e) {
        std::vector<int> out_sites;
        for (int y : e.support)
            if (active.count(y)) out_sites.push_back(y);
        return out_sites;
    };
    auto unassigned_count_at = [&](int y) {
        std::int64_t c = 0;
        for (std::size_t k = 0; k < g.edges.size(); ++k)
            if (out.site_of_edge[k] < 0)
                for (int z : g.edges[k].support)
                    if (z == y) { ++c; break; }
        return c;
    };

    for (int x = 0; x < n; ++x) {
        if (g.demand[x] == 0) continue;
        for (std::int64_t step = 0; step < g.demand[x]; ++step) {
            int best = -1;
            int best_class = 3;
            for (std::size_t k = 0; k < g.edges.size(); ++k) {
                if (out.site_of_edge[k] >= 0) continue;
                const auto& e = g.edges[k];
                if (std::find(e.support.begin(), e.support.end(), x) == e.support.end()) continue;
                auto inter = active_intersection(e);
                int cls;
                if (inter.size() == 1 && inter[0] == x) {
                    cls = 0;
                } else {
                    // dropping e must keep (a): every other active site in e
                    // retains at least its demand
                    bool safe = true;
                    for (int y : inter)
                        if (y != x && unassigned_count_at(y) - 1 < remaining_demand[y])
                            safe = false;
                    if (!safe) continue;
                    if (inter.size() == 2) {
                        int y = inter[0] == x ? inter[1] : inter[0];
                        // overloaded neighbor: too many edges that only it
                        // (or it and x) can still absorb
                        std::int64_t cy_dy = 0;
                        for (std::size_t m = 0; m < g.edges.size(); ++m) {
                            if (out.site_of_edge[m] >= 0) continue;
                            auto mi = active_intersection(g.edges[m]);
                            if ((mi.size() == 1 && mi[0] == y) ||
                                (mi.size() == 2 && ((mi[0] == x && mi[1] == y) ||
                                                    (mi[0] == y && mi[1] == x))))
                                ++cy_dy;
                        }
                        cls = cy_dy > remaining_demand[y] ? 1 : 2;
                    } else {
                        cls = 2;
                    }
                }
                if (cls < best_class) {
                    best_class = cls;
                    best = static_cast<int>(k);
                }
            }
            if (best < 0) {
                for (std::size_t k = 0; k < g.edges.size(); ++k)
                    if (out.site_of_edge[k] < 0) out.residual.push_back(static_cast<int>(k));
                return out;
            }
            out.site_of_edge[static_cast<std::size_t>(best)] = x;
        }
        remaining_demand[x] = 0;
        active.erase(x);
    }
    for (std::size_t k = 0; k < g.edges.size(); ++k)
        if (out.site_of_edge[k] < 0) out.residual.push_back(static_cast<int>(k));
    return out;
}

// A shift moves every prime leg to a single site, landing as a Kronecker
// leg there: the image algebra must coincide with one canonical leg slot.
inline bool is_shift(const Homo& h) {
    const SpinSystem& src = h.source();
    for (int x = 0; x < src.sites(); ++x) {
        auto legs = prime_legs(src.dim(x));
        for (std::size_t t = 0; t < legs.size(); ++t) {
            const std::int64_t p = legs[t];
            std::vector<int> sup;
            for (std::int64_t k = 0; k < p * p; ++k)
                sup = sorted_union(sup, h.leg_image(x, t, k / p, k % p).support());
            if (sup.size() != 1) return false;
            int y = sup[0];
            const std::int64_t ry = h.target().dim(y);
            Mat image_rows(static_cast<int>(p * p), static_cast<int>(ry * ry), h.field());
            for (std::int64_t k = 0; k < p * p; ++k) {
                Mat v = vec_row(embed(h.leg_image(x, t, k / p, k % p), {y}).matrix());
                for (std::int64_t c = 0; c < ry * ry; ++c)
                    image_rows.at(static_cast<int>(k), static_cast<int>(c)) =
                        v.at(0, static_cast<int>(c));
            }
            Subspace image_span = Subspace::span(image_rows);
            auto tlegs = prime_legs(ry);
            bool landed = false;
            for (std::size_t mu = 0; mu < tlegs.size() && !landed; ++mu) {
                if (tlegs[mu] != p) continue;
                Mat slot_rows(static_cast<int>(p * p), static_cast<int>(ry * ry), h.field());
                for (std::int64_t k = 0; k < p * p; ++k) {
                    Mat v = vec_row(leg_unit_matrix(tlegs, mu, k / p, k % p, h.field()));
                    for (std::int64_t c = 0; c < ry * ry; ++c)
                        slot_rows.at(static_cast<int>(k), static_cast<int>(c)) =
                            v.at(0, static_cast<int>(c));
                }
                if (Subspace::span(slot_rows) == image_span) landed = true;
            }
            if (!landed) return false;
        }
    }
    return true;
}

struct LegTransport {
    int origin_site = 0;
    int origin_leg = 0;
    int assigned_site = 0;
};

struct ShiftNormalization {
    Homo f;      // automorphism of the target straightening the images
    Homo sigma;  // f after alpha, a shift
    std::map<std::int64_t, Assignment> assignments;
    std::map<std::int64_t, std::vector<LegTransport>> transport;  // per prime
    Rational spread_f{0};
    Rational spread_sigma{0};
};

// Produces f with f(alpha(-)) a shift: per prime the hypergraph is
// assigned greedily, the assignment fixes where each source leg lands, and
// f is the automorphism carrying the image factors onto those slots.
inline ShiftNormalization normalize_to_shift(const Homo& alpha) {
    IsoResult iso = is_isomorphism(alpha);
    if (!iso.is_iso)
        throw std::invalid_argument("normalize_to_shift: input is not an isomorphism (" +
                                    iso.failure + ")");
    std::set<std::int64_t> primes;
    for (int x = 0; x < alpha.source().sites(); ++x)
        for (auto p : prime_legs(alpha.source().dim(x))) primes.insert(p);

    ShiftNormalization out;
    // arrival lists per target site, one entry per assigned source leg
    std::map<int, std::vector<std::tuple<std::int64_t, int, int>>> arrivals;
    for (std::int64_t p : primes) {
        Hypergraph g = build_hypergraph(alpha, p);
        Assignment a = assign(g);
        if (!a.complete())
            throw std::runtime_error("normalize_to_shift: assignment infeasible for prime " +
                                     std::to_string(p));
        for (std::size_t k = 0; k < g.edges.size(); ++k) {
            arrivals[a.site_of_edge[k]].emplace_back(p, g.edges[k].origin_site,
                                                     g.edges[k].origin_leg);
            out.transport[p].push_back(
                LegTransport{g.edges[k].origin_site, g.edges[k].origin_leg, a.site_of_edge[k]});
        }
        out.assignments.emplace(p, std::move(a));
    }
    std::map<std::pair<int, int>, std::pair<int, int>> slot_map;
    for (auto& [y, list] : arrivals) {
        std::sort(list.begin(), list.end());
        for (std::size_t mu = 0; mu < list.size(); ++mu) {
            auto [p, x, t] = list[mu];
            slot_map[{x, t}] = {y, static_cast<int>(mu)};
        }
    }
    Homo sigma = shift_homo(alpha.source(), alpha.target(), slot_map, alpha.field());
    out.f = compose(sigma, *iso.inverse);
    out.sigma = std::move(sigma);
    out.spread_f = out.f.spread();
    out.spread_sigma = out.sigma.spread();
    return out;
}

}  // namespace qcalab
