#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace spectral::arith {

using cplx = std::complex<double>;

// Smallest-prime-factor sieve. Everything below reads factorisations from it.
class FactorTable {
public:
    explicit FactorTable(std::int64_t limit);

    std::int64_t limit() const { return limit_; }
    std::int64_t smallest_prime_factor(std::int64_t n) const;
    bool is_prime(std::int64_t n) const { return n >= 2 && smallest_prime_factor(n) == n; }

    struct PrimePower {
        std::int64_t p;
        int e;
    };
    std::vector<PrimePower> factor(std::int64_t n) const;
    std::vector<std::int64_t> divisors(std::int64_t n) const;  // ascending

private:
    void check(std::int64_t n) const;

    std::int64_t limit_;
    std::vector<std::int32_t> spf_;
};

// sigma_alpha(n) = sum_{d | n} d^alpha
cplx sigma(cplx alpha, std::int64_t n, const FactorTable& table);
int moebius(std::int64_t n, const FactorTable& table);
int tau(std::int64_t n, const FactorTable& table);

// S(m, n; c) by direct enumeration, c <= kKloostermanMaxModulus.
inline constexpr std::int64_t kKloostermanMaxModulus = 1'000'000;
double kloosterman(std::int64_t m, std::int64_t n, std::int64_t c);

std::int64_t gcd(std::int64_t a, std::int64_t b);
// inverse of a mod c, requires gcd(a, c) = 1
std::int64_t mod_inverse(std::int64_t a, std::int64_t c);

}  // namespace spectral::arith
