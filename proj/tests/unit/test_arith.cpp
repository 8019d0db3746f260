#include <doctest.h>

#include <cmath>
#include <complex>
#include <numeric>
#include <random>

#include "spectral/arith.hpp"
#include "spectral/errors.hpp"

using namespace spectral::arith;

namespace {

constexpr double kPi = 3.14159265358979323846;

// brute-force oracles
cplx sigma_brute(cplx a, long n) {
    cplx s = 0.0;
    for (long d = 1; d <= n; ++d) {
        if (n % d == 0) s += std::exp(a * std::log(static_cast<double>(d)));
    }
    return s;
}

std::complex<double> kloosterman_brute(long m, long n, long c) {
    std::complex<double> s = 0.0;
    for (long x = 0; x < c; ++x) {
        if (std::gcd(x, c) != 1) continue;
        long xbar = 0;
        for (long y = 1; y <= c; ++y) {
            if ((x * y) % c == 1 % c) {
                xbar = y;
                break;
            }
        }
        s += std::polar(1.0, 2 * kPi * static_cast<double>(m * x + n * xbar) / c);
    }
    return s;
}

}  // namespace

TEST_CASE("factor table") {
    FactorTable ft(1000);
    CHECK(ft.smallest_prime_factor(97) == 97);
    CHECK(ft.smallest_prime_factor(91) == 7);
    CHECK(ft.smallest_prime_factor(1) == 1);
    for (long n = 2; n <= 1000; ++n) {
        CHECK(n % ft.smallest_prime_factor(n) == 0);
    }
    CHECK(ft.divisors(12) == std::vector<std::int64_t>{1, 2, 3, 4, 6, 12});
    CHECK_THROWS_AS(ft.smallest_prime_factor(1001), spectral::CapacityError);
    CHECK_THROWS_AS(ft.smallest_prime_factor(0), spectral::DomainError);
}

TEST_CASE("sigma") {
    FactorTable ft(5000);
    CHECK(std::abs(sigma(0.0, 1, ft) - 1.0) < 1e-15);
    CHECK(std::abs(sigma(1.0, 6, ft) - 12.0) < 1e-12);
    CHECK(std::abs(sigma(-1.0, 12, ft) - 28.0 / 12.0) < 1e-14);
    const cplx a(0.0, 2 * 3.7);
    CHECK(std::abs(sigma(-a, 360, ft) - std::conj(sigma(a, 360, ft))) < 1e-12);
    for (long n : {1L, 7L, 64L, 360L, 997L, 4096L}) {
        CHECK(std::abs(sigma(a, n, ft) - sigma_brute(a, n)) < 1e-10);
    }
    CHECK_THROWS_AS(sigma(0.0, 5001, ft), spectral::CapacityError);
}

TEST_CASE("moebius and tau") {
    FactorTable ft(1000);
    CHECK(moebius(1, ft) == 1);
    CHECK(moebius(12, ft) == 0);
    CHECK(moebius(6, ft) == 1);
    CHECK(moebius(30, ft) == -1);
    CHECK(tau(12, ft) == 6);
    // sum_{d | n} mu(d) = [n == 1]
    for (long n = 1; n <= 300; ++n) {
        int s = 0;
        for (auto d : ft.divisors(n)) s += moebius(d, ft);
        CHECK(s == (n == 1 ? 1 : 0));
    }
}

TEST_CASE("multiplicativity on a random grid") {
    FactorTable ft(100000);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<long> pick(1, 300);
    int tested = 0;
    while (tested < 200) {
        const long m = pick(rng), n = pick(rng);
        if (std::gcd(m, n) != 1) continue;
        ++tested;
        const cplx a(0.3, 1.7);
        CHECK(std::abs(sigma(a, m * n, ft) - sigma(a, m, ft) * sigma(a, n, ft)) <
              1e-10 * std::abs(sigma(a, m * n, ft)) + 1e-12);
        CHECK(moebius(m * n, ft) == moebius(m, ft) * moebius(n, ft));
    }
}

TEST_CASE("kloosterman examples") {
    CHECK(kloosterman(3, 7, 1) == doctest::Approx(1.0));
    CHECK(std::abs(kloosterman(1, 1, 3) - (-1.0)) < 1e-12);
    CHECK(std::abs(kloosterman(1, 1, 5) - (2 + 2 * std::cos(4 * kPi / 5))) < 1e-12);
    CHECK(std::abs(kloosterman(1, 1, 5) - 0.3819660112501051) < 1e-12);
    // Ramanujan sum: S(m, 0; c) = c_c(m)
    CHECK(std::abs(kloosterman(0, 0, 12) - 4.0) < 1e-12);
    CHECK(std::abs(kloosterman(1, 0, 12) - 0.0) < 1e-12);
    CHECK_THROWS_AS(kloosterman(1, 1, 1'000'001), spectral::CapacityError);
    CHECK_THROWS_AS(kloosterman(1, 1, 0), spectral::DomainError);
}

TEST_CASE("kloosterman: brute force, symmetry and the Weil bound") {
    FactorTable ft(1000);
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<long> mn(1, 50), cc(1, 500);
    for (int i = 0; i < 150; ++i) {
        const long m = mn(rng), n = mn(rng), c = cc(rng);
        const double s = kloosterman(m, n, c);
        CHECK(std::abs(s - kloosterman(n, m, c)) < 1e-9);
        const double g = static_cast<double>(std::gcd(std::gcd(m, n), c));
        CHECK(std::abs(s) <= tau(c, ft) * std::sqrt(g) * std::sqrt(static_cast<double>(c)) + 1e-9);
        if (c <= 120) {
            const auto b = kloosterman_brute(m, n, c);
            CHECK(std::abs(s - b.real()) < 1e-9);
            CHECK(std::abs(b.imag()) < 1e-9);
        }
    }
    // negative arguments reduce mod c
    CHECK(std::abs(kloosterman(-1, 1, 7) - kloosterman_brute(-1, 1, 7).real()) < 1e-12);
}

TEST_CASE("mod_inverse") {
    for (long c : {2L, 9L, 97L, 360L}) {
        for (long a = 1; a < c; ++a) {
            if (std::gcd(a, c) != 1) continue;
            CHECK((a * mod_inverse(a, c)) % c == 1 % c);
        }
    }
    CHECK_THROWS_AS(mod_inverse(4, 8), spectral::DomainError);
}
