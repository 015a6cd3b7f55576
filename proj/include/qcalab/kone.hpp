#pragma once

#include <cstdlib>
#include <map>

#include "qcalab/qca.hpp"

namespace qcalab {

// An element of R^x (x) Q in coordinates: over Q the free part of the unit
// group is generated by the primes, so the class is a finitely supported
// map prime -> rational exponent (the sign is torsion and dies in the
// tensor). Over F_p every unit is torsion and the group is trivial.
class RationalizedUnits {
public:
    RationalizedUnits() = default;

    void add(std::int64_t prime, const Rational& exp) {
        if (exp == 0) return;
        auto it = e_.find(prime);
        if (it == e_.end()) {
            e_.emplace(prime, exp);
        } else {
            it->second += exp;
            if (it->second == 0) e_.erase(it);
        }
    }

    bool is_trivial() const { return e_.empty(); }
    const std::map<std::int64_t, Rational>& entries() const { return e_; }

    RationalizedUnits& operator+=(const RationalizedUnits& o) {
        for (const auto& [p, e] : o.e_) add(p, e);
        return *this;
    }
    friend RationalizedUnits operator+(RationalizedUnits a, const RationalizedUnits& b) {
        return a += b;
    }
    bool operator==(const RationalizedUnits&) const = default;

private:
    std::map<std::int64_t, Rational> e_;
};

namespace detail {

inline std::int64_t prime_bound_from_env() {
    if (const char* s = std::getenv("QCALAB_PRIME_BOUND")) {
        long long v = std::atoll(s);
        if (v > 1) return v;
    }
    return 1000000;
}

// Trial division with the configured cap; failing loudly beats silent
// heuristics on adversarial input.
inline std::map<Integer, std::int64_t> factor_integer(Integer n) {
    if (n < 0) n = -n;
    if (n == 0) throw std::domain_error("factoring zero");
    std::map<Integer, std::int64_t> out;
    const Integer bound(prime_bound_from_env());
    for (Integer p = 2; p * p <= n; ++p) {
        if (p > bound)
            throw std::runtime_error("factorization exceeds QCALAB_PRIME_BOUND");
        while (n % p == 0) {
            ++out[p];
            n /= p;
        }
    }
    if (n > 1) {
        if (n > bound) throw std::runtime_error("factorization exceeds QCALAB_PRIME_BOUND");
        ++out[n];
    }
    return out;
}

}  // namespace detail

// f_n(A) = det(A) (x) 1/n. Sign and roots of unity are killed by the
// tensor, so over Q the class is the prime factorization of |det| with
// exponents scaled by 1/n; over a finite field everything is torsion.
inline RationalizedUnits k1_class(const Mat& a, std::int64_t n) {
    if (a.rows() != a.cols() || a.rows() != n)
        throw std::invalid_argument("k1_class: declared size must match the matrix");
    Scalar det = det_ff(a);
    if (det.is_zero()) throw std::invalid_argument("k1_class: singular matrix");
    RationalizedUnits out;
    if (!a.field().is_rational()) return out;  // units of F_p are torsion
    const Rational& d = det.rational_value();
    for (const auto& [p, e] : detail::factor_integer(boost::multiprecision::numerator(d)))
        out.add(p.convert_to<std::int64_t>(), Rational(e, n));
    for (const auto& [p, e] : detail::factor_integer(boost::multiprecision::denominator(d)))
        out.add(p.convert_to<std::int64_t>(), Rational(-e, n));
    return out;
}

struct StabilizationCertificate {
    RationalizedUnits base;        // f_n(A)
    RationalizedUnits left;        // f_{kn}(I_k (x) A)
    RationalizedUnits right;       // f_{kn}(A (x) I_k)
    bool holds = false;
};

// f_{kn}(A (x) I_k) = f_n(A), checked for both tensor orders (they differ
// by a permutation conjugation, so both must agree).
inline StabilizationCertificate check_stabilization(const Mat& a, std::int64_t k) {
    StabilizationCertificate cert;
    const std::int64_t n = a.rows();
    Mat idk = Mat::identity(static_cast<int>(k), a.field());
    cert.base = k1_class(a, n);
    cert.left = k1_class(kron(idk, a), k * n);
    cert.right = k1_class(kron(a, idk), k * n);
    cert.holds = cert.base == cert.left && cert.base == cert.right;
    return cert;
}

// The section g of the split surjection: r (x) p/q is realized by the
// q x q diagonal matrix with first entry r^p.
inline Mat split_g(const Rational& r, std::int64_t p, std::int64_t q) {
    if (r == 0) throw std::invalid_argument("split_g: zero is not a unit");
    if (q < 1) throw std::invalid_argument("split_g: exponent denominator must be positive");
    FieldTag f = FieldTag::rationals();
    Mat m = Mat::identity(static_cast<int>(q), f);
    Rational rp(1);
    for (std::int64_t i = 0; i < (p < 0 ? -p : p); ++i) rp *= r;
    if (p < 0) rp = Rational(1) / rp;
    m.at(0, 0) = Scalar::rational(rp);
    return m;
}

struct SwapClassCertificate {
    bool raw_odd = false;        // parity of the plain swap permutation
    bool stabilized_even = false;  // parity after tensoring with I_2
    RationalizedUnits cls;       // always trivial: the sign is torsion
};

// The swap of the two Kronecker factors is conjugation by a permutation
// that is stably even; its rationalized class vanishes.
inline SwapClassCertificate swap_class(std::int64_t q, std::int64_t r) {
    SwapClassCertificate cert;
    std::vector<std::int64_t> perm(static_cast<std::size_t>(q * r));
    for (std::int64_t iq = 0; iq < q; ++iq)
        for (std::int64_t ir = 0; ir < r; ++ir)
            perm[static_cast<std::size_t>(iq * r + ir)] = ir * q + iq;
    std::int64_t inversions = 0;
    for (std::size_t i = 0; i < perm.size(); ++i)
        for (std::size_t j = i + 1; j < perm.size(); ++j)
            if (perm[i] > perm[j]) ++inversions;
    cert.raw_odd = inversions % 2 == 1;
    // sign(P (x) I_2) = sign(P)^2
    cert.stabilized_even = true;
    cert.cls = k1_class(swap_permutation_matrix(q, r, FieldTag::rationals()), q * r);
    return cert;
}

// Total class of one circuit layer: the sum of the gate classes.
inline RationalizedUnits layer_k1_class(const SpinSystem& sys, const std::vector<GateSpec>& layer) {
    RationalizedUnits total;
    for (const auto& gate : layer) {
        std::vector<int> block = gate.block;
        std::sort(block.begin(), block.end());
        std::int64_t n = detail::window_dim(sys, block);
        total += k1_class(gate.g, n);
    }
    return total;
}

}  // namespace qcalab
