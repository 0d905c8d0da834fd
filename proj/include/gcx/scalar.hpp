#pragma once

// Exact coefficient arithmetic: arbitrary-precision rationals and a
// machine-word prime field.  Every algorithm in this library is templated
// on the scalar type K; the two types below are the supported models.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gcx {

using Integer  = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline bool is_zero(const Rational& x) { return x.is_zero(); }

// Accepts "p", "-p" and "p/q"; q must be nonzero.
inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(Integer(s));
    Integer num(s.substr(0, slash));
    Integer den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("rational with zero denominator: " + s);
    if (den < 0) { num = -num; den = -den; }
    return Rational(num, den);
}

inline std::string to_string(const Rational& x) {
    if (denominator(x) == 1) return numerator(x).str();
    return numerator(x).str() + "/" + denominator(x).str();
}

// Z/p for a word-sized prime p.  A value constructed from a bare integer
// carries no modulus yet (p == 0); it adopts one on first contact with an
// attached value.  This lets generic code say K(0) or K(1) without a
// field context in scope.
struct PrimeField {
    std::uint64_t p   = 0;  // 0 while still a bare integer literal
    std::uint64_t v   = 0;  // residue in [0, p) when attached
    std::int64_t  raw = 0;  // literal value while unattached

    PrimeField() = default;
    PrimeField(long long n) : raw(n) {}
    PrimeField(long long n, std::uint64_t prime) { attach_value(n, prime); }

    bool attached() const { return p != 0; }

    void attach_value(long long n, std::uint64_t prime) {
        p = prime;
        std::int64_t m = n % static_cast<std::int64_t>(prime);
        if (m < 0) m += static_cast<std::int64_t>(prime);
        v = static_cast<std::uint64_t>(m);
        raw = 0;
    }

    PrimeField attached_to(std::uint64_t prime) const {
        if (attached()) {
            if (p != prime) throw std::logic_error("prime field modulus mismatch");
            return *this;
        }
        return PrimeField(raw, prime);
    }
};

namespace detail {

inline std::uint64_t fp_add(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
    std::uint64_t s = a + b;
    if (s >= p || s < a) s -= p;
    return s;
}

inline std::uint64_t fp_sub(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
    return a >= b ? a - b : a + (p - b);
}

inline std::uint64_t fp_mul(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % p);
}

inline std::uint64_t fp_inv(std::uint64_t a, std::uint64_t p) {
    if (a == 0) throw std::domain_error("division by zero in prime field");
    // extended Euclid on (a, p)
    std::int64_t t = 0, newt = 1;
    std::int64_t r = static_cast<std::int64_t>(p), newr = static_cast<std::int64_t>(a);
    while (newr != 0) {
        std::int64_t q = r / newr;
        t -= q * newt; std::swap(t, newt);
        r -= q * newr; std::swap(r, newr);
    }
    if (r != 1) throw std::domain_error("element not invertible mod p");
    if (t < 0) t += static_cast<std::int64_t>(p);
    return static_cast<std::uint64_t>(t);
}

} // namespace detail

inline PrimeField operator+(const PrimeField& a, const PrimeField& b) {
    if (!a.attached() && !b.attached()) return PrimeField(a.raw + b.raw);
    std::uint64_t p = a.attached() ? a.p : b.p;
    PrimeField x = a.attached_to(p), y = b.attached_to(p), r;
    r.p = p; r.v = detail::fp_add(x.v, y.v, p);
    return r;
}

inline PrimeField operator-(const PrimeField& a, const PrimeField& b) {
    if (!a.attached() && !b.attached()) return PrimeField(a.raw - b.raw);
    std::uint64_t p = a.attached() ? a.p : b.p;
    PrimeField x = a.attached_to(p), y = b.attached_to(p), r;
    r.p = p; r.v = detail::fp_sub(x.v, y.v, p);
    return r;
}

inline PrimeField operator-(const PrimeField& a) { return PrimeField(0) - a; }

inline PrimeField operator*(const PrimeField& a, const PrimeField& b) {
    if (!a.attached() && !b.attached()) return PrimeField(a.raw * b.raw);
    std::uint64_t p = a.attached() ? a.p : b.p;
    PrimeField x = a.attached_to(p), y = b.attached_to(p), r;
    r.p = p; r.v = detail::fp_mul(x.v, y.v, p);
    return r;
}

inline PrimeField operator/(const PrimeField& a, const PrimeField& b) {
    if (!a.attached() && !b.attached()) {
        if (b.raw == 0) throw std::domain_error("division by zero in prime field");
        if (a.raw % b.raw != 0) throw std::logic_error("non-integral division of bare literals");
        return PrimeField(a.raw / b.raw);
    }
    std::uint64_t p = a.attached() ? a.p : b.p;
    PrimeField x = a.attached_to(p), y = b.attached_to(p), r;
    r.p = p; r.v = detail::fp_mul(x.v, detail::fp_inv(y.v, p), p);
    return r;
}

inline PrimeField& operator+=(PrimeField& a, const PrimeField& b) { a = a + b; return a; }
inline PrimeField& operator-=(PrimeField& a, const PrimeField& b) { a = a - b; return a; }
inline PrimeField& operator*=(PrimeField& a, const PrimeField& b) { a = a * b; return a; }
inline PrimeField& operator/=(PrimeField& a, const PrimeField& b) { a = a / b; return a; }

inline bool operator==(const PrimeField& a, const PrimeField& b) {
    if (!a.attached() && !b.attached()) return a.raw == b.raw;
    std::uint64_t p = a.attached() ? a.p : b.p;
    return a.attached_to(p).v == b.attached_to(p).v;
}
inline bool operator!=(const PrimeField& a, const PrimeField& b) { return !(a == b); }

inline bool is_zero(const PrimeField& x) { return x.attached() ? x.v == 0 : x.raw == 0; }

inline std::string to_string(const PrimeField& x) {
    if (!x.attached()) return std::to_string(x.raw);
    return std::to_string(x.v);
}

// Maps a rational constant into the scalar type K.  The prime is ignored
// for Rational and selects the modulus for PrimeField.
template <class K>
K scalar_from_rational(const Rational& r, std::uint64_t prime);

template <>
inline Rational scalar_from_rational<Rational>(const Rational& r, std::uint64_t) { return r; }

template <>
inline PrimeField scalar_from_rational<PrimeField>(const Rational& r, std::uint64_t prime) {
    Integer num = numerator(r) % prime;
    Integer den = denominator(r) % prime;
    std::int64_t n = num.convert_to<std::int64_t>();
    std::int64_t d = den.convert_to<std::int64_t>();
    PrimeField a(n, prime), b(d, prime);
    return a / b;
}

template <class K>
struct ScalarName;
template <> struct ScalarName<Rational>   { static constexpr const char* value = "rational"; };
template <> struct ScalarName<PrimeField> { static constexpr const char* value = "prime"; };

} // namespace gcx
