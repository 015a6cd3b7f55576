#include <catch2/catch_amalgamated.hpp>

#include "qcalab/index.hpp"
#include "test_util.hpp"

using namespace qcalab;
using namespace qcalab::testutil;

namespace {

// Literal image-intersection oracle: span{alpha(units of A((gamma-w, gamma]))}
// intersected with the window algebra, all inside one dense ambient window.
// Only viable on small instances; the commutant route must agree.
Subspace intersection_oracle(const Homo& h, const Cut& c, int depth,
                             std::vector<int>* ambient_out) {
    const MetricSpace& space = *h.source().space;
    std::vector<int> j_sites = detail::cut_range(space, c.gamma, -depth, 0);
    std::vector<int> window = detail::cut_range(space, c.gamma, -c.radius, c.radius);
    std::int64_t jd = 1;
    for (int s : j_sites) jd *= h.source().dim(s);
    std::vector<Element> images;
    std::vector<int> ambient = window;
    for (std::int64_t i = 0; i < jd; ++i)
        for (std::int64_t j = 0; j < jd; ++j) {
            Mat u(static_cast<int>(jd), static_cast<int>(jd), h.field());
            u.at(static_cast<int>(i), static_cast<int>(j)) = Scalar::one(h.field());
            Element img = apply(h, Element(h.source(), j_sites, std::move(u)));
            ambient = sorted_union(ambient, img.support());
            images.push_back(std::move(img));
        }
    std::int64_t ad = detail::window_dim(h.target(), ambient);
    Mat rows(static_cast<int>(images.size()), static_cast<int>(ad * ad), h.field());
    for (std::size_t k = 0; k < images.size(); ++k) {
        Mat v = vec_row(embed(images[k], ambient).matrix());
        for (std::int64_t col = 0; col < ad * ad; ++col)
            rows.at(static_cast<int>(k), static_cast<int>(col)) = v.at(0, static_cast<int>(col));
    }
    std::int64_t wd = detail::window_dim(h.target(), window);
    Mat wrows(static_cast<int>(wd * wd), static_cast<int>(ad * ad), h.field());
    for (std::int64_t k = 0; k < wd * wd; ++k) {
        Mat u(static_cast<int>(wd), static_cast<int>(wd), h.field());
        u.at(static_cast<int>(k / wd), static_cast<int>(k % wd)) = Scalar::one(h.field());
        Mat v = vec_row(embed(Element(h.target(), window, std::move(u)), ambient).matrix());
        for (std::int64_t col = 0; col < ad * ad; ++col)
            wrows.at(static_cast<int>(k), static_cast<int>(col)) = v.at(0, static_cast<int>(col));
    }
    *ambient_out = ambient;
    return subspace_intersect(Subspace::span(rows), Subspace::span(wrows));
}

void check_boundary_against_oracle(const Homo& h, const Cut& c, int depth) {
    std::vector<int> ambient;
    Subspace oracle = intersection_oracle(h, c, depth, &ambient);
    auto [b, certs] = boundary_algebra(h, c);
    std::vector<int> window =
        detail::cut_range(*h.source().space, c.gamma, -c.radius, c.radius);
    auto basis = b.basis_elements();
    std::int64_t ad = detail::window_dim(h.target(), ambient);
    Mat rows(static_cast<int>(basis.size()), static_cast<int>(ad * ad), h.field());
    for (std::size_t k = 0; k < basis.size(); ++k) {
        Mat v = vec_row(embed(basis[k], ambient).matrix());
        for (std::int64_t col = 0; col < ad * ad; ++col)
            rows.at(static_cast<int>(k), static_cast<int>(col)) = v.at(0, static_cast<int>(col));
    }
    CHECK(Subspace::span(rows) == oracle);
}

}  // namespace

TEST_CASE("index of the identity is 1 with B the left window algebra") {
    auto sp = MetricSpace::circle(8);
    FieldTag f = FieldTag::prime_field(3);
    SpinSystem q = SpinSystem::uniform(sp, 2);
    Homo id = Homo::identity(q, f);
    for (int gamma = 0; gamma < 8; ++gamma) {
        AzClass cls = index(id, {gamma, 1});
        CHECK(cls.value == 1);
        CHECK(cls.dim_b == 4);  // A((gamma-1, gamma]) has dim m^2 = 4
        CHECK(cls.m == 2);
        CHECK(cls.certs.dim_is_square);
        CHECK(cls.certs.pair_checked);
        CHECK(cls.certs.pair.passed());
        CHECK(cls.certs.replacement_ok);
    }
    check_boundary_against_oracle(id, {3, 1}, 2);
}

TEST_CASE("translation step 1 on circle(8): boundary transports one site") {
    auto sp = MetricSpace::circle(8);
    FieldTag f = FieldTag::prime_field(3);
    for (std::int64_t d : {2, 3}) {
        SpinSystem q = SpinSystem::uniform(sp, d);
        Homo t1 = translation(q, 1, f);
        for (int gamma = 0; gamma < 8; ++gamma) {
            AzClass cls = index(t1, {gamma, 1});
            CHECK(cls.dim_b == d * d * d * d);  // B = A({gamma, gamma+1})
            CHECK(cls.value == Rational(d));
            CHECK(cls.certs.pair.passed());
            CHECK(cls.certs.replacement_ok);
        }
        // l-independence: any radius >= spread gives the same class
        CHECK(index(t1, {0, 2}).value == Rational(d));
    }
    // oracle agreement at every cut and both radii, d = 2
    SpinSystem q2 = SpinSystem::uniform(sp, 2);
    Homo t1 = translation(q2, 1, f);
    for (int gamma = 0; gamma < 8; ++gamma) {
        check_boundary_against_oracle(t1, {gamma, 1}, 2);
        check_boundary_against_oracle(t1, {gamma, 2}, 3);
    }
}

TEST_CASE("pump realizes prescribed fractions") {
    auto sp = MetricSpace::interval(6);
    const Cut central{2, 1};
    for (auto f : {FieldTag::prime_field(2), FieldTag::rationals()}) {
        // pump(1,1): trivial transport, index 1
        CHECK(index(pump(1, 1, sp, f), central).value == 1);

        Homo p21 = pump(2, 1, sp, f);
        CHECK(verify(p21).empty());
        CHECK(p21.spread() == 1);
        CHECK(index(p21, central).value == 2);

        AzClass c23 = index(pump(2, 3, sp, f), central);
        CHECK(c23.value == Rational(2, 3));
        CHECK(c23.dim_b == 16);  // (a^2)^2 with a = 2
        CHECK(c23.d == 4);
        CHECK(c23.m == 6);
        CHECK(c23.certs.pair.passed());
        CHECK(c23.certs.replacement_ok);

        CHECK(index(pump(3, 2, sp, f), central).value == Rational(3, 2));
    }
    // oracle agreement for the small pumps
    FieldTag f3 = FieldTag::prime_field(3);
    check_boundary_against_oracle(pump(2, 1, sp, f3), central, 2);
    check_boundary_against_oracle(pump(1, 2, sp, f3), central, 2);
    // pumps are honest shifts, hence isomorphisms
    auto iso = is_isomorphism(pump(2, 3, sp, f3));
    CHECK(iso.is_iso);
}

TEST_CASE("single-layer circuits are in the kernel") {
    auto sp = MetricSpace::circle(8);
    FieldTag f = FieldTag::prime_field(3);
    SpinSystem q(sp, {2, 1, 3, 1, 2, 1, 3, 1});
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 3; ++trial) {
        Homo circ = random_circuit_layer(q, f, rng);
        int radius = std::max<int>(1, static_cast<int>(boost::multiprecision::numerator(
            circ.spread()).convert_to<std::int64_t>()));
        for (int gamma = 0; gamma < 8; ++gamma) {
            AzClass cls = index(circ, {gamma, radius});
            CHECK(cls.value == 1);
        }
    }
    // two staggered layers compose to a two-layer circuit, still index 1
    Homo l1 = random_circuit_layer(q, f, rng);
    Homo l2 = random_circuit_layer(q, f, rng);
    Homo two = compose(l2, l1);
    for (int gamma = 0; gamma < 8; gamma += 2)
        CHECK(index(two, {gamma, 2}).value == 1);
    check_boundary_against_oracle(two, {0, 2}, 3);
}

TEST_CASE("index is multiplicative and conjugation invariant") {
    auto sp = MetricSpace::circle(8);
    FieldTag f = FieldTag::prime_field(3);
    SpinSystem q = SpinSystem::uniform(sp, 2);
    Homo t1 = translation(q, 1, f);
    std::mt19937_64 rng(47);

    auto cert = check_homomorphism(t1, t1, {2, 2});
    CHECK(cert.holds);
    CHECK(cert.lhs == 4);

    Homo circ = random_circuit_layer(q, f, rng);
    auto cert2 = check_homomorphism(t1, circ, {2, 2});
    CHECK(cert2.holds);
    CHECK(cert2.lhs == 2);

    // alpha with its inverse lands back at 1
    auto inv = is_isomorphism(t1);
    REQUIRE(inv.is_iso);
    auto cert3 = check_homomorphism(t1, *inv.inverse, {2, 2});
    CHECK(cert3.holds);
    CHECK(cert3.lhs == 1);

    // conjugate by a spread-zero circuit layer: same index at matching cuts
    Homo onsite = random_circuit_layer(q, f, rng, 1);
    Homo conj = compose(onsite, compose(t1, *is_isomorphism(onsite).inverse));
    CHECK(conj.spread() == 1);
    CHECK(index(conj, {2, 1}).value == index(t1, {2, 1}).value);
    CHECK(index(conj, {2, 2}).value == index(t1, {2, 2}).value);
}

TEST_CASE("index is stable under stabilization and stacking") {
    auto sp = MetricSpace::circle(8);
    FieldTag f = FieldTag::prime_field(3);
    SpinSystem q = SpinSystem::uniform(sp, 2);
    Homo t1 = translation(q, 1, f);
    SpinSystem s = SpinSystem::uniform(sp, 4);
    Homo st = stabilize(t1, s);
    CHECK(index(st, {2, 1}).value == index(t1, {2, 1}).value);

    // stack(alpha, alpha^{-1}) has index 1
    auto inv = is_isomorphism(t1);
    REQUIRE(inv.is_iso);
    Homo stacked = stack(t1, *inv.inverse);
    CHECK(index(stacked, {2, 1}).value == 1);

    // stack multiplies: translation (x) translation doubles dims, squares the class
    Homo tt = stack(t1, t1);
    CHECK(index(tt, {2, 1}).value == 4);
}

TEST_CASE("cut validation") {
    auto sp = MetricSpace::interval(6);
    FieldTag f = FieldTag::prime_field(2);
    Homo p = pump(2, 1, sp, f);
    CHECK_THROWS(index(p, {-1, 1}));  // window leaves the interval
    CHECK_THROWS(index(p, {5, 1}));   // constraint range leaves the interval
    auto spc = MetricSpace::circle(6);
    Homo t = translation(SpinSystem::uniform(spc, 2), 1, f);
    CHECK_THROWS(index(t, {0, 2}));   // 4l > N
}
