#include <catch2/catch_amalgamated.hpp>

#include "qcalab/subalg.hpp"

#include <random>

using namespace qcalab;

namespace {

std::vector<Element> site_units(const SpinSystem& sys, int x, FieldTag f) {
    std::vector<Element> out;
    for (std::int64_t i = 0; i < sys.dim(x); ++i)
        for (std::int64_t j = 0; j < sys.dim(x); ++j) out.push_back(matrix_unit(sys, x, i, j, f));
    return out;
}

Mat random_invertible(int n, FieldTag f, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> d(-3, 3);
    for (;;) {
        Mat m(n, n, f);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m.at(i, j) = Scalar::from_int(d(rng), f);
        if (is_invertible(m)) return m;
    }
}

}  // namespace

TEST_CASE("generate: scalars, full closure, diagonal algebra") {
    auto sp = MetricSpace::interval(1);
    FieldTag f = FieldTag::rationals();
    SpinSystem two(sp, {2}), three(sp, {3});

    Subalgebra scalars = generate({Element::identity(two, f)}, two, {0}, f);
    CHECK(scalars.dim() == 1);

    // e12 and e21 generate the full 2x2 algebra within two closure rounds
    Subalgebra full = generate({matrix_unit(two, 0, 0, 1, f), matrix_unit(two, 0, 1, 0, f)},
                               two, {0}, f);
    CHECK(full.dim() == 4);

    std::vector<Element> diag;
    for (std::int64_t i = 0; i < 3; ++i) diag.push_back(matrix_unit(three, 0, i, i, f));
    Subalgebra d = generate(diag, three, {0}, f);
    CHECK(d.dim() == 3);

    // monotone and idempotent
    Subalgebra again = generate(full.basis_elements(), two, {0}, f);
    CHECK(again.space() == full.space());
}

TEST_CASE("centralizer: scalars, full algebra, tensor factor") {
    auto sp = MetricSpace::interval(2);
    FieldTag f = FieldTag::prime_field(5);
    SpinSystem q(sp, {2, 2});  // Mat(k^4) as a two-site window

    Subalgebra full = generate(site_units(q, 0, f), q, {0}, f);
    CHECK(full.dim() == 4);
    CHECK(centralizer(full).dim() == 1);

    Subalgebra scalars = generate({Element::identity(q, f)}, q, {0}, f);
    CHECK(centralizer(scalars).dim() == 4);

    // Mat(k^2) (x) 1 inside Mat(k^4): centralizer is 1 (x) Mat(k^2)
    Subalgebra left = generate(site_units(q, 0, f), q, {0, 1}, f);
    Subalgebra c = centralizer(left);
    CHECK(c.dim() == 4);
    for (const auto& u : site_units(q, 1, f)) CHECK(c.contains(u));
    auto cert = verify_tensor_pair(left, c);
    CHECK(cert.passed());
    // double centralizer closes back
    Subalgebra cc = centralizer(c);
    CHECK(cc.dim() == left.dim());
    CHECK(cc.space() == left.densify().space());
}

TEST_CASE("verify_tensor_pair rejects (full, full)") {
    auto sp = MetricSpace::interval(1);
    FieldTag f = FieldTag::rationals();
    SpinSystem q(sp, {4});
    Subalgebra full = generate(site_units(q, 0, f), q, {0}, f);
    auto cert = verify_tensor_pair(full, full);
    CHECK_FALSE(cert.dims_match);
    CHECK_FALSE(cert.passed());
}

TEST_CASE("tensor_split recovers the relative factor") {
    auto sp = MetricSpace::interval(2);
    FieldTag f = FieldTag::rationals();
    SpinSystem q(sp, {2, 2});
    std::vector<int> a_sites = {0}, c_sites = {1};

    // B = A (x) 1: D must be the scalars
    Subalgebra b1 = generate(site_units(q, 0, f), q, {0, 1}, f);
    CHECK(tensor_split(b1, a_sites, c_sites).dim() == 1);

    // B = full window algebra: D is the full C-part
    auto gens = site_units(q, 0, f);
    for (const auto& u : site_units(q, 1, f)) gens.push_back(u);
    Subalgebra b2 = generate(gens, q, {0, 1}, f);
    CHECK(tensor_split(b2, a_sites, c_sites).dim() == 4);

    // B = A (x) diagonal: D is the diagonal algebra, dim 2
    auto gens3 = site_units(q, 0, f);
    gens3.push_back(matrix_unit(q, 1, 0, 0, f));
    gens3.push_back(matrix_unit(q, 1, 1, 1, f));
    Subalgebra b3 = generate(gens3, q, {0, 1}, f);
    CHECK(b3.dim() == 8);
    Subalgebra d3 = tensor_split(b3, a_sites, c_sites);
    CHECK(d3.dim() == 2);
    CHECK(d3.contains(matrix_unit(q, 1, 0, 0, f)));
    // 1 (x) D sits inside B exactly
    for (const auto& e : d3.basis_elements()) CHECK(b3.contains(e));

    // precondition violation: A-part not inside B
    Subalgebra small = generate({Element::identity(q, f)}, q, {0, 1}, f);
    CHECK_THROWS(tensor_split(small, a_sites, c_sites));
}

TEST_CASE("centralizer of conjugated full matrix subalgebras (randomized)") {
    auto sp = MetricSpace::interval(2);
    std::mt19937_64 rng(57);
    for (auto f : {FieldTag::prime_field(3), FieldTag::rationals()}) {
        for (int iter = 0; iter < 3; ++iter) {
            SpinSystem q(sp, {2, 3});
            const int n = 6;
            Mat g = random_invertible(n, f, rng);
            Mat ginv = inverse(g);
            std::vector<Element> gens;
            for (const auto& u : site_units(q, 0, f)) {
                Mat m = embed(u, {0, 1}).matrix();
                gens.emplace_back(q, std::vector<int>{0, 1}, g * m * ginv);
            }
            Subalgebra b = generate(gens, q, {0, 1}, f);
            CHECK(b.dim() == 4);
            Subalgebra c = centralizer(b);
            CHECK(c.dim() == 9);
            auto cert = verify_tensor_pair(b, c);
            CHECK(cert.passed());
        }
    }
}

TEST_CASE("factored subalgebras agree with their dense forms") {
    auto sp = MetricSpace::interval(2);
    FieldTag f = FieldTag::prime_field(3);
    SpinSystem q(sp, {2, 2});
    // factored B: diagonal at site 0, scalars at site 1
    Mat diag_rows(2, 4, f);
    diag_rows.at(0, 0) = Scalar::one(f);
    diag_rows.at(1, 3) = Scalar::one(f);
    Mat scal_rows(1, 4, f);
    scal_rows.at(0, 0) = Scalar::one(f);
    scal_rows.at(0, 3) = Scalar::one(f);
    Subalgebra fac = Subalgebra::factored(q, {0, 1},
                                          {Subspace::span(diag_rows), Subspace::span(scal_rows)});
    CHECK(fac.dim() == 2);
    Subalgebra dense = fac.densify();
    CHECK(dense.dim() == 2);
    CHECK(fac.contains(matrix_unit(q, 0, 0, 0, f)));
    CHECK_FALSE(fac.contains(matrix_unit(q, 0, 0, 1, f)));
    CHECK_FALSE(fac.contains(matrix_unit(q, 1, 0, 0, f)));
    // centralizer in factored form matches the dense centralizer dimension
    CHECK(centralizer(fac).dim() == centralizer(dense).dim());
}
