#include "spectral/arith.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spectral/errors.hpp"

namespace spectral::arith {

FactorTable::FactorTable(std::int64_t limit) : limit_(limit) {
    if (limit < 1) {
        throw ValidationError("FactorTable: limit must be >= 1");
    }
    if (limit > 200'000'000) {
        throw CapacityError("FactorTable: limit above 2e8 is not supported");
    }
    spf_.assign(static_cast<std::size_t>(limit) + 1, 0);
    spf_[1] = 1;
    for (std::int64_t i = 2; i <= limit; ++i) {
        if (spf_[i] != 0) continue;
        spf_[i] = static_cast<std::int32_t>(i);
        for (std::int64_t j = i * i; j <= limit; j += i) {
            if (spf_[j] == 0) spf_[j] = static_cast<std::int32_t>(i);
        }
    }
}

void FactorTable::check(std::int64_t n) const {
    if (n < 1) {
        throw DomainError("arith: argument must be a positive integer");
    }
    if (n > limit_) {
        throw CapacityError("arith: " + std::to_string(n) + " exceeds factor table limit " +
                            std::to_string(limit_));
    }
}

std::int64_t FactorTable::smallest_prime_factor(std::int64_t n) const {
    check(n);
    return spf_[n];
}

std::vector<FactorTable::PrimePower> FactorTable::factor(std::int64_t n) const {
    check(n);
    std::vector<PrimePower> out;
    while (n > 1) {
        const std::int64_t p = spf_[n];
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.push_back({p, e});
    }
    return out;
}

std::vector<std::int64_t> FactorTable::divisors(std::int64_t n) const {
    std::vector<std::int64_t> out{1};
    for (const auto& [p, e] : factor(n)) {
        const std::size_t base = out.size();
        std::int64_t pk = 1;
        for (int k = 1; k <= e; ++k) {
            pk *= p;
            for (std::size_t i = 0; i < base; ++i) out.push_back(out[i] * pk);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

cplx sigma(cplx alpha, std::int64_t n, const FactorTable& table) {
    // multiplicative: product over p^e of 1 + p^a + ... + p^{ea}
    cplx result = 1.0;
    for (const auto& [p, e] : table.factor(n)) {
        const cplx pa = std::exp(alpha * std::log(static_cast<double>(p)));
        cplx term = 1.0, sum = 1.0;
        for (int k = 1; k <= e; ++k) {
            term *= pa;
            sum += term;
        }
        result *= sum;
    }
    return result;
}

int moebius(std::int64_t n, const FactorTable& table) {
    int mu = 1;
    for (const auto& pe : table.factor(n)) {
        if (pe.e > 1) return 0;
        mu = -mu;
    }
    return mu;
}

int tau(std::int64_t n, const FactorTable& table) {
    int t = 1;
    for (const auto& pe : table.factor(n)) t *= pe.e + 1;
    return t;
}

std::int64_t gcd(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }

std::int64_t mod_inverse(std::int64_t a, std::int64_t c) {
    std::int64_t old_r = ((a % c) + c) % c, r = c;
    std::int64_t old_s = 1, s = 0;
    while (r != 0) {
        const std::int64_t q = old_r / r;
        old_r -= q * r;
        std::swap(old_r, r);
        old_s -= q * s;
        std::swap(old_s, s);
    }
    if (old_r != 1) {
        throw DomainError("mod_inverse: argument not invertible");
    }
    return ((old_s % c) + c) % c;
}

double kloosterman(std::int64_t m, std::int64_t n, std::int64_t c) {
    if (c < 1) {
        throw DomainError("kloosterman: modulus must be >= 1");
    }
    if (c > kKloostermanMaxModulus) {
        throw CapacityError("kloosterman: modulus " + std::to_string(c) + " exceeds 10^6");
    }
    if (c == 1) return 1.0;
    const std::int64_t mm = ((m % c) + c) % c;
    const std::int64_t nn = ((n % c) + c) % c;
    const double w = 2.0 * 3.14159265358979323846 / static_cast<double>(c);
    double re = 0.0, im = 0.0;
    for (std::int64_t x = 1; x < c; ++x) {
        if (std::gcd(x, c) != 1) continue;
        const std::int64_t xbar = mod_inverse(x, c);
        // reduce the phase exactly before converting to an angle
        const std::int64_t k = (mm * x + nn * xbar) % c;
        re += std::cos(w * static_cast<double>(k));
        im += std::sin(w * static_cast<double>(k));
    }
    if (std::abs(im) > 1e-9 * std::max(1.0, static_cast<double>(c))) {
        throw AccuracyError("kloosterman: imaginary residue " + std::to_string(im), std::abs(im));
    }
    return re;
}

}  // namespace spectral::arith
