#include "gcx/scalar.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using gcx::PrimeField;
using gcx::Rational;

TEST_CASE("rational parse and print round trip") {
    CHECK(gcx::to_string(gcx::parse_rational("3/4")) == "3/4");
    CHECK(gcx::to_string(gcx::parse_rational("-3/4")) == "-3/4");
    CHECK(gcx::to_string(gcx::parse_rational("5")) == "5");
    CHECK(gcx::to_string(gcx::parse_rational("0")) == "0");
    CHECK(gcx::to_string(gcx::parse_rational("6/4")) == "3/2");
    CHECK(gcx::to_string(gcx::parse_rational("3/-6")) == "-1/2");
    CHECK_THROWS(gcx::parse_rational("1/0"));
}

TEST_CASE("rational arithmetic") {
    Rational a = gcx::parse_rational("1/3");
    Rational b = gcx::parse_rational("1/6");
    CHECK(a + b == gcx::parse_rational("1/2"));
    CHECK(gcx::is_zero(a - a));
    CHECK(!gcx::is_zero(a));
}

TEST_CASE("prime field basics") {
    const std::uint64_t p = 101;
    PrimeField a(37, p), b(64, p);
    CHECK((a + b) == PrimeField(0, p));
    CHECK((a * PrimeField(3, p)) == PrimeField(10, p));
    CHECK((PrimeField(1, p) / a) * a == PrimeField(1, p));
    CHECK_THROWS(a / PrimeField(0, p));
    PrimeField other(1, 103);
    CHECK_THROWS(a + other);
}

TEST_CASE("prime field inverses across the whole field") {
    const std::uint64_t p = 101;
    for (std::uint64_t x = 1; x < p; ++x) {
        PrimeField a(static_cast<long long>(x), p);
        CHECK(a * (PrimeField(1, p) / a) == PrimeField(1, p));
    }
}

TEST_CASE("bare literals adopt a modulus on contact") {
    const std::uint64_t p = 7;
    PrimeField bare(10);        // no modulus yet
    CHECK(!bare.attached());
    PrimeField attached(3, p);
    PrimeField sum = bare + attached;
    CHECK(sum.attached());
    CHECK(sum == PrimeField(13, p));
    CHECK(gcx::is_zero(PrimeField(0)));
    CHECK(!gcx::is_zero(PrimeField(-2)));
    CHECK(PrimeField(-1) * PrimeField(-1) == PrimeField(1));
}

TEST_CASE("scalar_from_rational agrees with field arithmetic") {
    const std::uint64_t p = 7;
    // 3/4 mod 7: 4^{-1} = 2, so 3*2 = 6
    PrimeField x = gcx::scalar_from_rational<PrimeField>(gcx::parse_rational("3/4"), p);
    CHECK(x == PrimeField(6, p));
    CHECK(gcx::scalar_from_rational<Rational>(gcx::parse_rational("3/4"), p) ==
          gcx::parse_rational("3/4"));
    // negative numerators
    PrimeField y = gcx::scalar_from_rational<PrimeField>(gcx::parse_rational("-1/2"), p);
    CHECK(y == PrimeField(3, p));
}

TEST_CASE("rational identities map homomorphically to the prime field") {
    const std::uint64_t p = 1000003;
    std::mt19937 rng(20260818);
    std::uniform_int_distribution<int> num(-30, 30);
    std::uniform_int_distribution<int> den(1, 30);
    for (int trial = 0; trial < 200; ++trial) {
        Rational a(num(rng), den(rng));
        Rational b(num(rng), den(rng));
        auto f = [&](const Rational& r) { return gcx::scalar_from_rational<PrimeField>(r, p); };
        CHECK(f(a + b) == f(a) + f(b));
        CHECK(f(a * b) == f(a) * f(b));
        CHECK(f(a - b) == f(a) - f(b));
        if (!gcx::is_zero(b)) CHECK(f(a / b) == f(a) / f(b));
    }
}
