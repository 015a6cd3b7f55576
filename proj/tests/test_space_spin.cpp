#include <catch2/catch_amalgamated.hpp>

#include "qcalab/spin.hpp"

#include <random>

using namespace qcalab;

namespace {

Element random_element(const SpinSystem& sys, const std::vector<int>& support, FieldTag f,
                       std::mt19937_64& rng, int radius = 3) {
    std::int64_t d = 1;
    for (int s : support) d *= sys.dim(s);
    Mat m(static_cast<int>(d), static_cast<int>(d), f);
    std::uniform_int_distribution<int> dist(-radius, radius);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m.at(i, j) = Scalar::from_int(dist(rng), f);
    return Element(sys, support, std::move(m));
}

}  // namespace

TEST_CASE("space builders and metric invariants") {
    auto iv = MetricSpace::interval(3);
    CHECK(iv->dist(0, 2) == 2);

    auto circ = MetricSpace::circle(4);
    CHECK(circ->dist(0, 3) == 1);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(circ->dist(i, j) <= 2);  // floor(N/2)

    auto prod = MetricSpace::product(MetricSpace::interval(2), MetricSpace::interval(2));
    // d((0,0),(1,1)) = max(1,1) = 1 under the L-infinity rule
    CHECK(prod->dist(0, 3) == 1);

    auto grid = MetricSpace::grid({3, 3});
    // L-infinity ball of radius 1 around the center has 3^2 sites
    int count = 0;
    for (int s = 0; s < grid->size(); ++s)
        if (grid->dist(4, s) <= 1) ++count;
    CHECK(count == 9);

    // exhaustive triangle inequality on every built space
    for (const auto& sp : {iv, circ, prod, grid})
        for (int x = 0; x < sp->size(); ++x)
            for (int y = 0; y < sp->size(); ++y)
                for (int z = 0; z < sp->size(); ++z)
                    CHECK(sp->dist(x, z) <= sp->dist(x, y) + sp->dist(y, z));

    // explicit tables are validated
    std::vector<std::vector<Rational>> bad = {
        {Rational(0), Rational(1), Rational(5)},
        {Rational(1), Rational(0), Rational(1)},
        {Rational(5), Rational(1), Rational(0)}};
    CHECK_THROWS(MetricSpace::explicit_table(bad));
}

TEST_CASE("stack_systems pointwise product") {
    auto sp = MetricSpace::interval(3);
    SpinSystem q = SpinSystem::uniform(sp, 2);
    SpinSystem ones = SpinSystem::uniform(sp, 1);
    SpinSystem r = SpinSystem::uniform(sp, 3);
    CHECK(stack_systems(q, ones) == q);
    CHECK(stack_systems(q, r) == SpinSystem::uniform(sp, 6));
}

TEST_CASE("matrix units satisfy the unit relations") {
    auto sp = MetricSpace::interval(2);
    FieldTag f = FieldTag::prime_field(5);
    for (std::int64_t d = 2; d <= 4; ++d) {
        SpinSystem q(sp, {d, d});
        for (std::int64_t i = 0; i < d; ++i)
            for (std::int64_t j = 0; j < d; ++j)
                for (std::int64_t k = 0; k < d; ++k)
                    for (std::int64_t l = 0; l < d; ++l) {
                        Element prod = mul(matrix_unit(q, 0, i, j, f), matrix_unit(q, 0, k, l, f));
                        Element expect = (j == k) ? matrix_unit(q, 0, i, l, f)
                                                  : Element::zero(q, f);
                        CHECK(elements_equal(prod, expect));
                    }
        Element sum = Element::zero(q, f);
        for (std::int64_t i = 0; i < d; ++i) sum = add(sum, matrix_unit(q, 0, i, i, f));
        CHECK(elements_equal(sum, Element::identity(q, f)));
        CHECK(minimize_support(sum).support().empty());
        // units at distinct sites commute
        CHECK(elements_commute(matrix_unit(q, 0, 0, 0, f), matrix_unit(q, 1, 0, 0, f)));
    }
}

TEST_CASE("embed round trip and disjoint-support multiplication") {
    auto sp = MetricSpace::interval(3);
    SpinSystem q(sp, {2, 3, 2});
    FieldTag f = FieldTag::rationals();
    std::mt19937_64 rng(17);
    Element a = random_element(q, {0}, f, rng);
    Element wide = embed(a, {0, 1, 2});
    CHECK(elements_equal(minimize_support(wide), minimize_support(a)));

    Element b = random_element(q, {2}, f, rng);
    // disjointly supported product equals the stacked matrix on the union
    Element ab = mul(a, b);
    Element ba = mul(b, a);
    CHECK(elements_equal(ab, ba));
    Mat expect = kron(a.matrix(), b.matrix());
    Element direct(q, {0, 2}, expect);
    CHECK(elements_equal(ab, direct));

    Element e = matrix_unit(q, 0, 0, 0, f);
    CHECK(elements_equal(mul(e, e), e));
}

TEST_CASE("phi_stack matches the displayed block formula") {
    auto sp = MetricSpace::interval(1);
    FieldTag f = FieldTag::rationals();
    SpinSystem q(sp, {2}), r(sp, {3});
    std::mt19937_64 rng(29);
    Element a = random_element(q, {0}, f, rng);
    Element b = random_element(r, {0}, f, rng);
    Element st = phi_stack(a, b);
    CHECK(st.matrix() == kron(a.matrix(), b.matrix()));
    // unit preservation
    Element one = phi_stack(Element::identity(q, f), Element::identity(r, f));
    CHECK(elements_equal(one, Element::identity(stack_systems(q, r), f)));
}

TEST_CASE("phi_unstack inverts phi_stack and phi is multiplicative") {
    auto sp = MetricSpace::interval(6);
    FieldTag f = FieldTag::prime_field(3);
    SpinSystem q(sp, {2, 1, 3, 2, 1, 4});
    SpinSystem r(sp, {2, 2, 1, 3, 1, 1});
    SpinSystem qr = stack_systems(q, r);
    std::mt19937_64 rng(31);
    for (int iter = 0; iter < 25; ++iter) {
        std::vector<int> sup;
        for (int s = 0; s < 6 && sup.size() < 2; ++s)
            if (rng() % 3 == 0) sup.push_back(s);
        if (sup.empty()) sup = {0};
        Element c = random_element(qr, sup, f, rng);
        auto blocks = phi_unstack(c, q, r);
        Element back = phi_restack(blocks, q, r, sup, f);
        CHECK(elements_equal(back, c));
    }
    for (int iter = 0; iter < 25; ++iter) {
        std::vector<int> sup = {static_cast<int>(rng() % 3), 3 + static_cast<int>(rng() % 3)};
        if (sup[0] >= sup[1]) sup = {0, 3};
        Element a1 = random_element(q, sup, f, rng);
        Element a2 = random_element(q, sup, f, rng);
        Element b1 = random_element(r, sup, f, rng);
        Element b2 = random_element(r, sup, f, rng);
        Element lhs = phi_stack(mul(a1, a2), mul(b1, b2));
        Element rhs = mul(phi_stack(a1, b1), phi_stack(a2, b2));
        CHECK(elements_equal(lhs, rhs));
    }
}

TEST_CASE("minimize_support examples") {
    auto sp = MetricSpace::interval(2);
    FieldTag f = FieldTag::rationals();
    SpinSystem q(sp, {2, 2});
    // global identity embeds to empty support
    Element one = embed(Element::identity(q, f), {0, 1});
    CHECK(minimize_support(one).support().empty());

    Element e = embed(matrix_unit(q, 0, 0, 0, f), {0, 1});
    CHECK(minimize_support(e).support() == std::vector<int>{0});

    // e11 (x) e11 + e22 (x) e22 genuinely needs both sites
    Element corr = add(mul(matrix_unit(q, 0, 0, 0, f), matrix_unit(q, 1, 0, 0, f)),
                       mul(matrix_unit(q, 0, 1, 1, f), matrix_unit(q, 1, 1, 1, f)));
    CHECK(minimize_support(corr).support() == std::vector<int>({0, 1}));
}

TEST_CASE("elements with disjoint support commute (randomized)") {
    auto sp = MetricSpace::interval(4);
    SpinSystem q(sp, {2, 3, 2, 2});
    FieldTag f = FieldTag::prime_field(7);
    std::mt19937_64 rng(41);
    for (int iter = 0; iter < 10; ++iter) {
        Element a = random_element(q, {0, 1}, f, rng);
        Element b = random_element(q, {2, 3}, f, rng);
        CHECK(elements_commute(a, b));
    }
}
