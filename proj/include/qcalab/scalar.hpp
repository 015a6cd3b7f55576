#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

namespace qcalab {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Which field a computation lives in: the rationals (p == 0) or F_p.
struct FieldTag {
    std::uint64_t p = 0;

    static FieldTag rationals() { return FieldTag{0}; }
    static FieldTag prime_field(std::uint64_t p) { return FieldTag{p}; }

    bool is_rational() const { return p == 0; }
    bool operator==(const FieldTag&) const = default;

    std::string to_string() const {
        return is_rational() ? "Q" : "Fp:" + std::to_string(p);
    }
};

inline bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

namespace detail {

struct FpValue {
    std::uint64_t v;
    std::uint64_t p;
    bool operator==(const FpValue&) const = default;
};

inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % p);
}

inline std::uint64_t powmod_u64(std::uint64_t a, std::uint64_t e, std::uint64_t p) {
    std::uint64_t r = 1 % p;
    a %= p;
    while (e) {
        if (e & 1) r = mulmod_u64(r, a, p);
        a = mulmod_u64(a, a, p);
        e >>= 1;
    }
    return r;
}

inline std::uint64_t invmod_u64(std::uint64_t a, std::uint64_t p) {
    a %= p;
    if (a == 0) throw std::domain_error("division by zero in F_p");
    return powmod_u64(a, p - 2, p);  // p prime
}

}  // namespace detail

// An exact field element: a rational, or a residue mod a prime p.
// Rationals are kept in lowest terms with positive denominator (the
// boost backend maintains this); residues are kept reduced in [0, p).
// Binary operations reject operands from different fields.
class Scalar {
public:
    Scalar() : value_(Rational(0)) {}

    static Scalar rational(Rational r) { return Scalar(std::move(r)); }
    static Scalar residue(std::uint64_t v, std::uint64_t p) {
        if (!is_prime_u64(p)) throw std::invalid_argument("modulus must be prime");
        return Scalar(detail::FpValue{v % p, p});
    }
    static Scalar zero(FieldTag f) {
        return f.is_rational() ? rational(Rational(0)) : residue(0, f.p);
    }
    static Scalar one(FieldTag f) {
        return f.is_rational() ? rational(Rational(1)) : residue(1, f.p);
    }
    static Scalar from_int(long long n, FieldTag f) {
        if (f.is_rational()) return rational(Rational(n));
        long long r = n % static_cast<long long>(f.p);
        if (r < 0) r += static_cast<long long>(f.p);
        return residue(static_cast<std::uint64_t>(r), f.p);
    }
    static Scalar from_integer(const Integer& n, FieldTag f) {
        if (f.is_rational()) return rational(Rational(n));
        Integer r = n % Integer(f.p);
        if (r < 0) r += Integer(f.p);
        return residue(static_cast<std::uint64_t>(r), f.p);
    }

    FieldTag field() const {
        if (std::holds_alternative<Rational>(value_)) return FieldTag::rationals();
        return FieldTag::prime_field(std::get<detail::FpValue>(value_).p);
    }

    bool is_zero() const {
        if (const auto* r = std::get_if<Rational>(&value_)) return *r == 0;
        return std::get<detail::FpValue>(value_).v == 0;
    }
    bool is_one() const {
        if (const auto* r = std::get_if<Rational>(&value_)) return *r == 1;
        return std::get<detail::FpValue>(value_).v == 1;
    }

    const Rational& rational_value() const {
        if (!std::holds_alternative<Rational>(value_))
            throw std::logic_error("not a rational scalar");
        return std::get<Rational>(value_);
    }
    std::uint64_t residue_value() const {
        return std::get<detail::FpValue>(value_).v;
    }

    friend Scalar operator+(const Scalar& a, const Scalar& b) {
        a.check_same_field(b);
        if (const auto* r = std::get_if<Rational>(&a.value_))
            return rational(*r + std::get<Rational>(b.value_));
        const auto& x = std::get<detail::FpValue>(a.value_);
        const auto& y = std::get<detail::FpValue>(b.value_);
        std::uint64_t s = x.v + y.v;
        if (s >= x.p) s -= x.p;
        return Scalar(detail::FpValue{s, x.p});
    }
    friend Scalar operator-(const Scalar& a, const Scalar& b) {
        a.check_same_field(b);
        if (const auto* r = std::get_if<Rational>(&a.value_))
            return rational(*r - std::get<Rational>(b.value_));
        const auto& x = std::get<detail::FpValue>(a.value_);
        const auto& y = std::get<detail::FpValue>(b.value_);
        return Scalar(detail::FpValue{(x.v + x.p - y.v) % x.p, x.p});
    }
    friend Scalar operator*(const Scalar& a, const Scalar& b) {
        a.check_same_field(b);
        if (const auto* r = std::get_if<Rational>(&a.value_))
            return rational(*r * std::get<Rational>(b.value_));
        const auto& x = std::get<detail::FpValue>(a.value_);
        const auto& y = std::get<detail::FpValue>(b.value_);
        return Scalar(detail::FpValue{detail::mulmod_u64(x.v, y.v, x.p), x.p});
    }
    friend Scalar operator/(const Scalar& a, const Scalar& b) {
        a.check_same_field(b);
        if (const auto* r = std::get_if<Rational>(&a.value_)) {
            const auto& d = std::get<Rational>(b.value_);
            if (d == 0) throw std::domain_error("division by zero");
            return rational(*r / d);
        }
        const auto& x = std::get<detail::FpValue>(a.value_);
        const auto& y = std::get<detail::FpValue>(b.value_);
        return Scalar(detail::FpValue{
            detail::mulmod_u64(x.v, detail::invmod_u64(y.v, x.p), x.p), x.p});
    }
    Scalar operator-() const {
        if (const auto* r = std::get_if<Rational>(&value_)) return rational(-*r);
        const auto& x = std::get<detail::FpValue>(value_);
        return Scalar(detail::FpValue{x.v == 0 ? 0 : x.p - x.v, x.p});
    }
    Scalar& operator+=(const Scalar& b) { return *this = *this + b; }
    Scalar& operator-=(const Scalar& b) { return *this = *this - b; }
    Scalar& operator*=(const Scalar& b) { return *this = *this * b; }
    Scalar& operator/=(const Scalar& b) { return *this = *this / b; }

    bool operator==(const Scalar& b) const {
        if (field() != b.field()) return false;
        return value_ == b.value_;
    }
    bool operator!=(const Scalar& b) const { return !(*this == b); }

    Scalar inverse() const { return one(field()) / *this; }

    // Canonical text form: "n" or "n/d" for rationals, the residue for F_p.
    std::string to_string() const {
        if (const auto* r = std::get_if<Rational>(&value_)) {
            Integer num = boost::multiprecision::numerator(*r);
            Integer den = boost::multiprecision::denominator(*r);
            if (den == 1) return num.str();
            return num.str() + "/" + den.str();
        }
        return std::to_string(std::get<detail::FpValue>(value_).v);
    }

    // Parses the canonical form; rejects non-canonical inputs such as
    // "2/4", "3/1", or "4/-2".
    static Scalar parse(const std::string& s, FieldTag f) {
        if (f.is_rational()) {
            auto slash = s.find('/');
            if (slash == std::string::npos) {
                return rational(Rational(Integer(s)));
            }
            Integer num(s.substr(0, slash));
            Integer den(s.substr(slash + 1));
            if (den <= 0) throw std::invalid_argument("denominator must be positive: " + s);
            if (den == 1) throw std::invalid_argument("non-canonical rational (use \"" + num.str() + "\"): " + s);
            if (boost::multiprecision::gcd(num < 0 ? Integer(-num) : num, den) != 1)
                throw std::invalid_argument("rational not in lowest terms: " + s);
            Rational r(num, den);
            return rational(r);
        }
        Integer v(s);
        if (v < 0 || v >= Integer(f.p))
            throw std::invalid_argument("residue out of range [0,p): " + s);
        return residue(static_cast<std::uint64_t>(v), f.p);
    }

private:
    explicit Scalar(Rational r) : value_(std::move(r)) {}
    explicit Scalar(detail::FpValue v) : value_(v) {}

    void check_same_field(const Scalar& b) const {
        if (field() != b.field())
            throw std::invalid_argument("mixed field tags: " + field().to_string() +
                                        " vs " + b.field().to_string());
    }

    std::variant<Rational, detail::FpValue> value_;
};

}  // namespace qcalab
