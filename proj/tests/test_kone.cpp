#include <catch2/catch_amalgamated.hpp>

#include "qcalab/kone.hpp"
#include "test_util.hpp"

using namespace qcalab;
using namespace qcalab::testutil;

namespace {

RationalizedUnits units_of(std::initializer_list<std::pair<std::int64_t, Rational>> init) {
    RationalizedUnits u;
    for (const auto& [p, e] : init) u.add(p, e);
    return u;
}

}  // namespace

TEST_CASE("k1_class basics") {
    FieldTag q = FieldTag::rationals();
    Mat d41(2, 2, q);
    d41.at(0, 0) = Scalar::from_int(4, q);
    d41.at(1, 1) = Scalar::one(q);
    CHECK(k1_class(d41, 2) == units_of({{2, Rational(1)}}));

    // explicit product of elementary matrices has det 1, hence trivial class
    Mat e1 = Mat::identity(3, q);
    e1.at(0, 1) = Scalar::from_int(7, q);
    Mat e2 = Mat::identity(3, q);
    e2.at(2, 0) = Scalar::from_int(-5, q);
    CHECK(k1_class(e1 * e2 * e1, 3).is_trivial());

    // every class over F_p is trivial
    FieldTag f7 = FieldTag::prime_field(7);
    std::mt19937_64 rng(3);
    Mat a = random_invertible(3, f7, rng);
    CHECK(k1_class(a, 3).is_trivial());

    // negative determinants lose their sign in the tensor
    Mat neg(1, 1, q);
    neg.at(0, 0) = Scalar::from_int(-6, q);
    CHECK(k1_class(neg, 1) == units_of({{2, Rational(1)}, {3, Rational(1)}}));

    Mat sing = Mat::zeros(2, 2, q);
    CHECK_THROWS(k1_class(sing, 2));
    CHECK_THROWS(k1_class(d41, 3));
}

TEST_CASE("k1_class is a homomorphism at fixed size") {
    FieldTag q = FieldTag::rationals();
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 10; ++iter) {
        Mat a = random_invertible(3, q, rng);
        Mat b = random_invertible(3, q, rng);
        CHECK(k1_class(a * b, 3) == k1_class(a, 3) + k1_class(b, 3));
    }
}

TEST_CASE("stabilization identity in both tensor orders") {
    FieldTag q = FieldTag::rationals();
    Mat d21(2, 2, q);
    d21.at(0, 0) = Scalar::from_int(2, q);
    d21.at(1, 1) = Scalar::one(q);
    auto cert = check_stabilization(d21, 3);
    CHECK(cert.holds);
    CHECK(cert.base == units_of({{2, Rational(1, 2)}}));

    CHECK(check_stabilization(Mat::identity(3, q), 4).holds);

    std::mt19937_64 rng(11);
    for (int iter = 0; iter < 6; ++iter) {
        Mat a = random_invertible(2 + static_cast<int>(rng() % 3), q, rng);
        for (std::int64_t k = 2; k <= 4; ++k) CHECK(check_stabilization(a, k).holds);
    }
}

TEST_CASE("split surjection: f after g is the identity") {
    CHECK(split_g(Rational(2), 1, 1).at(0, 0) == Scalar::from_int(2, FieldTag::rationals()));
    CHECK(k1_class(split_g(Rational(2), 1, 1), 1) == units_of({{2, Rational(1)}}));
    CHECK(k1_class(split_g(Rational(4), 1, 2), 2) == units_of({{2, Rational(1)}}));
    CHECK(k1_class(split_g(Rational(6), 2, 3), 3) ==
          units_of({{2, Rational(2, 3)}, {3, Rational(2, 3)}}));

    std::mt19937_64 rng(13);
    for (int iter = 0; iter < 25; ++iter) {
        // random unit r and exponent p/q; class of g must be r (x) p/q
        std::int64_t num = 1 + static_cast<std::int64_t>(rng() % 20);
        std::int64_t den = 1 + static_cast<std::int64_t>(rng() % 20);
        Rational r(num, den);
        if (r == 1) continue;
        std::int64_t p = static_cast<std::int64_t>(rng() % 5) - 2;
        std::int64_t qq = 1 + static_cast<std::int64_t>(rng() % 4);
        RationalizedUnits expect;
        RationalizedUnits base = k1_class(split_g(r, 1, 1), 1);
        for (const auto& [pr, e] : base.entries()) expect.add(pr, e * Rational(p, qq));
        CHECK(k1_class(split_g(r, p, qq), qq) == expect);
    }
    CHECK_THROWS(split_g(Rational(0), 1, 2));
}

TEST_CASE("swap permutations are stably even with trivial class") {
    auto c22 = swap_class(2, 2);
    CHECK(c22.cls.is_trivial());
    CHECK(c22.stabilized_even);
    // one trivial factor gives the identity permutation
    auto c14 = swap_class(1, 4);
    CHECK_FALSE(c14.raw_odd);
    CHECK(c14.cls.is_trivial());
    for (std::int64_t q = 1; q <= 4; ++q)
        for (std::int64_t r = 1; r <= 4; ++r) CHECK(swap_class(q, r).cls.is_trivial());
}

TEST_CASE("special and elementary layers carry the trivial class") {
    auto sp = MetricSpace::interval(4);
    FieldTag f = FieldTag::rationals();
    SpinSystem q = SpinSystem::uniform(sp, 2);
    std::mt19937_64 rng(17);
    std::vector<GateSpec> layer;
    // block {0,1}: special gate with determinant one
    GateSpec special;
    special.block = {0, 1};
    special.kind = GateKind::Special;
    for (;;) {
        Mat g = random_invertible(4, f, rng);
        Scalar d = det_ff(g);
        Mat fix = Mat::identity(4, f);
        fix.at(0, 0) = Scalar::one(f) / d;
        special.g = fix * g;
        if (det_ff(special.g).is_one()) break;
    }
    layer.push_back(special);
    // blocks {2}, {3}: elementary shears
    for (int s = 2; s < 4; ++s) {
        GateSpec e;
        e.block = {s};
        e.kind = GateKind::Elementary;
        e.g = Mat::identity(2, f);
        e.g.at(0, 1) = Scalar::from_int(3 + s, f);
        e.elementary_factors = {e.g};
        layer.push_back(e);
    }
    Homo circ = circuit_single_layer(q, layer, f);
    CHECK(verify(circ).empty());
    CHECK(layer_k1_class(q, layer).is_trivial());
}

TEST_CASE("factorization cap is honored") {
    FieldTag q = FieldTag::rationals();
    Mat big(1, 1, q);
    big.at(0, 0) = Scalar::rational(Rational(Integer("1000000007")));  // prime past the cap
    CHECK_THROWS(k1_class(big, 1));
}
