#pragma once

#include <nlohmann/json.hpp>

#include "qcalab/coarse.hpp"
#include "qcalab/index.hpp"
#include "qcalab/kone.hpp"
#include "qcalab/shiftnorm.hpp"

namespace qcalab::io {

using json = nlohmann::json;

// Thrown on malformed documents; the CLI maps it to exit code 2.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string rational_str(const Rational& r) {
    return Scalar::rational(r).to_string();
}

inline Rational parse_rational(const std::string& s) {
    try {
        return Scalar::parse(s, FieldTag::rationals()).rational_value();
    } catch (const std::exception& e) {
        throw SchemaError(std::string("bad rational: ") + e.what());
    }
}

inline FieldTag parse_field(const std::string& s) {
    if (s == "Q") return FieldTag::rationals();
    if (s.rfind("Fp:", 0) == 0) {
        long long p = std::atoll(s.c_str() + 3);
        if (p < 2 || !is_prime_u64(static_cast<std::uint64_t>(p)))
            throw SchemaError("field modulus must be prime: " + s);
        return FieldTag::prime_field(static_cast<std::uint64_t>(p));
    }
    throw SchemaError("unknown field tag: " + s);
}

// --- spaces -----------------------------------------------------------------

inline json space_to_json(const MetricSpace& sp) {
    json j;
    j["kind"] = sp.kind_name();
    switch (sp.kind()) {
        case MetricSpace::Kind::Interval:
        case MetricSpace::Kind::Circle:
            j["params"] = {{"n", sp.params()[0]}};
            break;
        case MetricSpace::Kind::Grid:
            j["params"] = {{"dims", sp.params()}};
            break;
        default: {
            // products serialize through their table
            j["kind"] = "explicit";
            json rows = json::array();
            for (int i = 0; i < sp.size(); ++i) {
                json row = json::array();
                for (int k = 0; k < sp.size(); ++k) row.push_back(rational_str(sp.dist(i, k)));
                rows.push_back(row);
            }
            j["dist"] = rows;
        }
    }
    return j;
}

inline SpacePtr space_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind")) throw SchemaError("space: object with kind required");
    std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "interval") return MetricSpace::interval(j.at("params").at("n").get<int>());
        if (kind == "circle") return MetricSpace::circle(j.at("params").at("n").get<int>());
        if (kind == "grid")
            return MetricSpace::grid(j.at("params").at("dims").get<std::vector<int>>());
        if (kind == "product") {
            const auto& factors = j.at("params").at("factors");
            if (!factors.is_array() || factors.size() != 2)
                throw SchemaError("product space needs two factors");
            return MetricSpace::product(space_from_json(factors[0]), space_from_json(factors[1]));
        }
        if (kind == "explicit") {
            std::vector<std::vector<Rational>> dist;
            for (const auto& row : j.at("dist")) {
                std::vector<Rational> r;
                for (const auto& v : row) r.push_back(parse_rational(v.get<std::string>()));
                dist.push_back(std::move(r));
            }
            return MetricSpace::explicit_table(dist);
        }
    } catch (const SchemaError&) {
        throw;
    } catch (const std::exception& e) {
        throw SchemaError(std::string("space: ") + e.what());
    }
    throw SchemaError("space: unknown kind " + kind);
}

// --- systems ----------------------------------------------------------------

inline json system_to_json(const SpinSystem& q) {
    json j;
    j["space"] = space_to_json(*q.space);
    json dims = json::object();
    for (int x = 0; x < q.sites(); ++x)
        if (q.dim(x) > 1) dims[std::to_string(x)] = q.dim(x);
    j["q"] = dims;
    return j;
}

inline SpinSystem system_from_json(const json& j) {
    SpacePtr sp = space_from_json(j.at("space"));
    std::vector<std::int64_t> dims(static_cast<std::size_t>(sp->size()), 1);
    if (j.contains("q")) {
        for (const auto& [key, val] : j.at("q").items()) {
            int site = std::atoi(key.c_str());
            if (site < 0 || site >= sp->size()) throw SchemaError("system: site out of range: " + key);
            std::int64_t d = val.get<std::int64_t>();
            if (d < 1) throw SchemaError("system: dimensions must be >= 1");
            dims[static_cast<std::size_t>(site)] = d;
        }
    }
    return SpinSystem(sp, std::move(dims));
}

// --- elements and matrices ----------------------------------------------------

inline json entries_to_json(const Mat& m) {
    json entries = json::array();
    for (int i = 0; i < m.rows(); ++i)
        for (int k = 0; k < m.cols(); ++k)
            if (!m.at(i, k).is_zero()) entries.push_back({i, k, m.at(i, k).to_string()});
    return entries;
}

inline Mat entries_from_json(const json& entries, int rows, int cols, FieldTag f) {
    Mat m(rows, cols, f);
    for (const auto& e : entries) {
        if (!e.is_array() || e.size() != 3) throw SchemaError("matrix entry must be [row, col, value]");
        int i = e[0].get<int>(), k = e[1].get<int>();
        if (i < 0 || i >= rows || k < 0 || k >= cols) throw SchemaError("matrix entry out of range");
        try {
            m.at(i, k) = Scalar::parse(e[2].get<std::string>(), f);
        } catch (const std::exception& ex) {
            throw SchemaError(std::string("matrix entry: ") + ex.what());
        }
    }
    return m;
}

inline json element_body_to_json(const Element& e) {
    json j;
    j["support"] = e.support();
    j["entries"] = entries_to_json(e.matrix());
    return j;
}

inline Element element_body_from_json(const json& j, const SpinSystem& sys, FieldTag f) {
    std::vector<int> support = j.at("support").get<std::vector<int>>();
    std::int64_t d = 1;
    for (int s : support) {
        if (s < 0 || s >= sys.sites()) throw SchemaError("element: support site out of range");
        d *= sys.dim(s);
    }
    Mat m = entries_from_json(j.at("entries"), static_cast<int>(d), static_cast<int>(d), f);
    try {
        return Element(sys, std::move(support), std::move(m));
    } catch (const std::exception& e) {
        throw SchemaError(std::string("element: ") + e.what());
    }
}

inline json matrix_to_json(const Mat& m) {
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["entries"] = entries_to_json(m);
    return j;
}

inline Mat matrix_from_json(const json& j, FieldTag f) {
    return entries_from_json(j.at("entries"), j.at("rows").get<int>(), j.at("cols").get<int>(), f);
}

// --- homomorphisms ------------------------------------------------------------

inline json homo_to_json(const Homo& h) {
    json j;
    j["source"] = system_to_json(h.source());
    j["target"] = system_to_json(h.target());
    json images = json::object();
    for (int x = 0; x < h.source().sites(); ++x) {
        std::int64_t qx = h.source().dim(x);
        if (qx == 1) continue;
        json site = json::object();
        for (std::int64_t i = 0; i < qx; ++i)
            for (std::int64_t k = 0; k < qx; ++k)
                site[std::to_string(i) + "," + std::to_string(k)] =
                    element_body_to_json(h.unit_image(x, i, k));
        images[std::to_string(x)] = std::move(site);
    }
    j["images"] = std::move(images);
    return j;
}

inline Homo homo_from_json(const json& j, FieldTag f) {
    SpinSystem source = system_from_json(j.at("source"));
    SpinSystem target = system_from_json(j.at("target"));
    if (source.space->size() != target.space->size())
        throw SchemaError("homo: source and target sites disagree");
    // reuse the source space object so the systems compare equal
    target = SpinSystem(source.space, target.q);
    std::vector<std::vector<std::vector<Element>>> images(source.sites());
    const json& im = j.at("images");
    for (int x = 0; x < source.sites(); ++x) {
        std::int64_t qx = source.dim(x);
        auto legs = prime_legs(qx);
        images[x].resize(legs.size());
        if (qx == 1) continue;
        const std::string key = std::to_string(x);
        if (!im.contains(key)) throw SchemaError("homo: missing images for site " + key);
        // read the full unit images, then contract them to leg images
        std::vector<Element> units;
        units.reserve(static_cast<std::size_t>(qx * qx));
        for (std::int64_t i = 0; i < qx; ++i)
            for (std::int64_t k = 0; k < qx; ++k) {
                std::string ukey = std::to_string(i) + "," + std::to_string(k);
                if (!im.at(key).contains(ukey))
                    throw SchemaError("homo: missing unit image " + ukey + " at site " + key);
                units.push_back(element_body_from_json(im.at(key).at(ukey), target, f));
            }
        for (std::size_t t = 0; t < legs.size(); ++t) {
            const std::int64_t p = legs[t];
            for (std::int64_t i = 0; i < p; ++i)
                for (std::int64_t k = 0; k < p; ++k) {
                    // e^{(leg t)}_{ik} (x) id = sum over the other digits
                    Element acc = Element::zero(target, f);
                    std::vector<std::int64_t> digits(legs.size());
                    std::vector<std::int64_t> rest_dims;
                    for (std::size_t u = 0; u < legs.size(); ++u)
                        if (u != t) rest_dims.push_back(legs[u]);
                    std::int64_t rest = 1;
                    for (auto d : rest_dims) rest *= d;
                    std::vector<std::int64_t> rd;
                    for (std::int64_t r = 0; r < rest; ++r) {
                        detail::decode_index(r, rest_dims, rd);
                        for (std::size_t u = 0, m = 0; u < legs.size(); ++u)
                            if (u != t) digits[u] = rd[m++];
                        digits[t] = i;
                        std::int64_t row = detail::encode_index(digits, legs);
                        digits[t] = k;
                        std::int64_t col = detail::encode_index(digits, legs);
                        acc = add(acc, units[static_cast<std::size_t>(row * qx + col)]);
                    }
                    images[x][t].push_back(minimize_support(acc));
                }
        }
    }
    try {
        return Homo(std::move(source), std::move(target), f, std::move(images));
    } catch (const std::exception& e) {
        throw SchemaError(std::string("homo: ") + e.what());
    }
}

// --- chains ---------------------------------------------------------------------

inline json prime_vector_to_json(const PrimeVector& v) {
    json j = json::object();
    for (auto [p, c] : v.entries()) j[std::to_string(p)] = c;
    return j;
}

inline PrimeVector prime_vector_from_json(const json& j) {
    PrimeVector v;
    for (const auto& [key, val] : j.items()) {
        std::int64_t p = std::atoll(key.c_str());
        if (!is_prime_u64(static_cast<std::uint64_t>(p))) throw SchemaError("chain: " + key + " is not prime");
        v.add(p, val.get<std::int64_t>());
    }
    return v;
}

inline json chain0_to_json(const Chain0& c) {
    json sites = json::object();
    for (const auto& [s, v] : c.entries()) sites[std::to_string(s)] = prime_vector_to_json(v);
    return json{{"sites", sites}};
}

inline Chain0 chain0_from_json(const json& j) {
    Chain0 c;
    for (const auto& [key, val] : j.at("sites").items())
        c.add(std::atoi(key.c_str()), prime_vector_from_json(val));
    return c;
}

inline json chain1_to_json(const Chain1& c) {
    json pairs = json::array();
    for (const auto& [pair, v] : c.entries())
        pairs.push_back({pair.first, pair.second, prime_vector_to_json(v)});
    return json{{"bound", rational_str(c.bound())}, {"pairs", pairs}};
}

inline Chain1 chain1_from_json(const json& j) {
    Chain1 c(parse_rational(j.at("bound").get<std::string>()));
    for (const auto& p : j.at("pairs"))
        c.add(p[0].get<int>(), p[1].get<int>(), prime_vector_from_json(p[2]));
    return c;
}

// --- documents -------------------------------------------------------------------

constexpr int kFormatVersion = 1;

struct Document {
    FieldTag field;
    std::string kind;
    json payload;
};

inline Document document_from_json(const json& j) {
    if (!j.is_object()) throw SchemaError("document must be a JSON object");
    if (!j.contains("format_version") || j.at("format_version").get<int>() != kFormatVersion)
        throw SchemaError("unrecognized format_version");
    if (!j.contains("field") || !j.contains("kind") || !j.contains("payload"))
        throw SchemaError("document needs field, kind, payload");
    Document d;
    d.field = parse_field(j.at("field").get<std::string>());
    d.kind = j.at("kind").get<std::string>();
    d.payload = j.at("payload");
    return d;
}

inline json document_to_json(const Document& d) {
    return json{{"format_version", kFormatVersion},
                {"field", d.field.to_string()},
                {"kind", d.kind},
                {"payload", d.payload}};
}

// --- result serialization -----------------------------------------------------

inline json certificates_to_json(const IndexCertificates& c) {
    json j;
    j["dim_is_square"] = c.dim_is_square;
    j["factored_route"] = c.factored_route;
    j["pair"] = {{"checked", c.pair_checked},
                 {"commute", c.pair.commute},
                 {"dims_match", c.pair.dims_match},
                 {"mult_full_rank", c.pair.mult_full_rank},
                 {"intersection_scalars", c.pair.intersection_scalars},
                 {"dim_b", c.pair.dim_b},
                 {"dim_c", c.pair.dim_c}};
    j["replacement"] = {{"checked", c.replacement_checked}, {"ok", c.replacement_ok}};
    return j;
}

// Structure constants b_i b_j = sum_k c_ijk b_k of a small boundary algebra.
inline json structure_constants_to_json(const Subalgebra& b, std::int64_t dim_cap = 32) {
    if (b.dim() > dim_cap) return nullptr;
    Subalgebra bd = b.densify();
    auto basis = bd.basis_elements();
    const int n = static_cast<int>(bd.window_dim());
    const int d = static_cast<int>(basis.size());
    Mat lhs(n * n, d, bd.field());
    for (int k = 0; k < d; ++k) {
        Mat v = vec_row(embed(basis[static_cast<std::size_t>(k)], bd.support()).matrix());
        for (int r = 0; r < n * n; ++r) lhs.at(r, k) = v.at(0, r);
    }
    Mat rhs(n * n, d * d, bd.field());
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Mat v = vec_row(embed(mul(basis[static_cast<std::size_t>(i)],
                                      basis[static_cast<std::size_t>(j)]),
                                  bd.support())
                                .matrix());
            for (int r = 0; r < n * n; ++r) rhs.at(r, i * d + j) = v.at(0, r);
        }
    auto [ok, sol] = solve(lhs, rhs);
    if (!ok) return nullptr;  // not closed; callers treat as no data
    json out = json::array();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                const Scalar& c = sol.at(k, i * d + j);
                if (!c.is_zero()) out.push_back({i, j, k, c.to_string()});
            }
    return out;
}

inline json az_class_to_json(const AzClass& cls, bool with_structure = true) {
    json j;
    j["index"] = rational_str(cls.value);
    j["dimB"] = cls.dim_b;
    j["d"] = cls.d;
    j["m"] = cls.m;
    j["certificates"] = certificates_to_json(cls.certs);
    if (with_structure && cls.field.is_rational())
        j["structure_constants"] = structure_constants_to_json(cls.boundary);
    return j;
}

inline json units_to_json(const RationalizedUnits& u) {
    json j = json::object();
    for (const auto& [p, e] : u.entries()) j[std::to_string(p)] = rational_str(e);
    return j;
}

}  // namespace qcalab::io
