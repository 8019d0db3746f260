#include "spectral/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace spectral::specfun {

namespace {

// B_{2k} for k = 1..14.
constexpr std::array<double, 14> kBernoulli = {
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
};

constexpr double kStirlingShift = 12.0;

bool is_pole(cplx z) {
    return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

cplx stirling_log_gamma(cplx z) {
    const cplx inv = 1.0 / z;
    const cplx inv2 = inv * inv;
    cplx series = 0.0;
    cplx power = inv;
    for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
        const double kk = static_cast<double>(k);
        series += kBernoulli[k - 1] / (2.0 * kk * (2.0 * kk - 1.0)) * power;
        power *= inv2;
    }
    return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * kPi) + series;
}

struct Quad {
    __float128 re;
    __float128 im;
};

}  // namespace

void QuadratureSpec::validate() const {
    if (!(step > 0.0) || !(radius > 0.0) || !(target_abs_tol > 0.0) || max_refinements < 1) {
        throw DomainError("QuadratureSpec requires step > 0, radius > 0, target_abs_tol > 0");
    }
}

namespace detail {
void throw_no_convergence(double delta, double tol) {
    std::ostringstream msg;
    msg << "trapezoid rule did not converge: last step-halving delta " << delta
        << " exceeds tolerance " << tol;
    throw AccuracyError(msg.str(), delta);
}
}  // namespace detail

cplx log_gamma(cplx z) {
    if (is_pole(z)) {
        throw DomainError("log_gamma: pole at non-positive integer");
    }
    // Upward recursion; each log(z + k) stays on the same side of the cut as z,
    // so the accumulated sum reproduces the principal branch.
    cplx shift = 0.0;
    while (z.real() < kStirlingShift) {
        shift += std::log(z);
        z += 1.0;
    }
    return stirling_log_gamma(z) - shift;
}

cplx polygamma(int k, cplx z) {
    if (k != 0 && k != 1) {
        throw DomainError("polygamma: only orders 0 and 1 are implemented");
    }
    if (is_pole(z)) {
        throw DomainError("polygamma: pole at non-positive integer");
    }
    cplx shift = 0.0;
    while (z.real() < kStirlingShift) {
        shift += (k == 0) ? -1.0 / z : 1.0 / (z * z);
        z += 1.0;
    }
    const cplx inv = 1.0 / z;
    const cplx inv2 = inv * inv;
    cplx value;
    if (k == 0) {
        value = std::log(z) - 0.5 * inv;
        cplx power = inv2;
        for (std::size_t j = 1; j <= kBernoulli.size(); ++j) {
            value -= kBernoulli[j - 1] / (2.0 * j) * power;
            power *= inv2;
        }
    } else {
        value = inv + 0.5 * inv2;
        cplx power = inv2 * inv;
        for (std::size_t j = 1; j <= kBernoulli.size(); ++j) {
            value += kBernoulli[j - 1] * power;
            power *= inv2;
        }
    }
    return value + shift;
}

cplx zeta(cplx s) {
    if (s == cplx(1.0, 0.0)) {
        throw DomainError("zeta: pole at s = 1");
    }
    if (s.real() < 0.5 || std::abs(s.imag()) > 500.0) {
        throw RangeError("zeta: supported envelope is Re s >= 1/2, |Im s| <= 500");
    }
    // Euler-Maclaurin with N chosen so that (|s| + 2m) / (2 pi N) <= 0.27.
    const int m = static_cast<int>(kBernoulli.size());
    const int n_terms = 10 + static_cast<int>(std::ceil((std::abs(s) + 2.0 * m) / (2.0 * kPi * 0.27)));
    cplx sum = 0.0;
    for (int n = n_terms - 1; n >= 1; --n) {
        sum += std::exp(-s * std::log(static_cast<double>(n)));
    }
    const double big_n = static_cast<double>(n_terms);
    const cplx n_pow = std::exp(-s * std::log(big_n));  // N^{-s}
    sum += n_pow * big_n / (s - 1.0) + 0.5 * n_pow;
    // Correction terms B_{2k}/(2k)! * s(s+1)...(s+2k-2) * N^{-s-2k+1}.
    cplx rising = s;           // s(s+1)...(s+2k-2), starting at k = 1
    cplx power = n_pow / big_n;  // N^{-s-1}
    double factorial = 2.0;    // (2k)!
    for (int k = 1; k <= m; ++k) {
        sum += kBernoulli[k - 1] / factorial * rising * power;
        rising *= (s + (2.0 * k - 1.0)) * (s + 2.0 * k);
        power /= big_n * big_n;
        factorial *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
    }
    return sum;
}

cplx bessel_j_imag(double r, double x) {
    if (!(x > 0.0)) {
        throw DomainError("bessel_j_imag: x must be positive");
    }
    if (std::abs(r) > 60.0 || x > kBesselJMaxArg) {
        throw RangeError("bessel_j_imag: envelope is |r| <= 60, 0 < x <= 60");
    }
    const double nu = 2.0 * r;
    // S = sum_k (-x^2/4)^k / (k! (1 + i nu)_k), accumulated in binary128.
    const __float128 quarter_sq = -static_cast<__float128>(x) * x / 4;
    Quad term{1, 0};
    Quad sum{1, 0};
    __float128 max_norm = 1;
    const int min_terms = static_cast<int>(x) + 5;
    for (int k = 0; k < 2000; ++k) {
        const __float128 dre = static_cast<__float128>(k + 1) * (k + 1);
        const __float128 dim = static_cast<__float128>(k + 1) * nu;
        const __float128 dnorm = dre * dre + dim * dim;
        // term *= quarter_sq / (dre + i dim)
        const __float128 re = (term.re * dre + term.im * dim) / dnorm * quarter_sq;
        const __float128 im = (term.im * dre - term.re * dim) / dnorm * quarter_sq;
        term = {re, im};
        sum.re += term.re;
        sum.im += term.im;
        const __float128 norm = term.re * term.re + term.im * term.im;
        max_norm = std::max(max_norm, norm);
        if (k > min_terms && norm < max_norm * static_cast<__float128>(1e-70)) {
            break;
        }
    }
    const cplx series(static_cast<double>(sum.re), static_cast<double>(sum.im));
    const cplx i_nu(0.0, nu);
    const cplx prefactor = std::exp(i_nu * std::log(x / 2.0) - log_gamma(1.0 + i_nu));
    return prefactor * series;
}

double bessel_k_imag_scaled(double r, double x) {
    if (!(x > 0.0)) {
        throw DomainError("bessel_k_imag: x must be positive");
    }
    const double nu = std::abs(r);
    if (nu > 200.0) {
        throw RangeError("bessel_k_imag: envelope is |r| <= 200");
    }
    // Lift u -> u + i(pi/2 - delta). The saddle choice cos(delta) = nu/x balances
    // the growth of exp(nu * delta) against the decay of exp(-x sin(delta) cosh u).
    double delta = kPi / 2;
    if (nu > 0.0) {
        delta = std::max(std::acos(std::min(1.0, nu / x)), std::min(kPi / 2, 3.0 / nu));
    }
    const double sd = std::sin(delta);
    const double cd = std::cos(delta);
    const double peak = nu * delta - x * sd;
    const double u_max = std::acosh(1.0 + 42.0 / (x * sd));
    const double freq = std::max(nu, x * cd * std::cosh(u_max)) + 1.0;
    QuadratureSpec spec;
    spec.radius = u_max;
    spec.step = std::min(0.25, 1.5 / freq);
    // the integrand peaks at exp(peak); below ~eps * L1 norm the halving deltas are rounding noise
    spec.target_abs_tol = 1e-14 * std::exp(peak) * std::max(1.0, u_max);
    spec.max_refinements = 14;
    const auto integrand = [&](double u) {
        const double amp = nu * delta - x * sd * std::cosh(u);
        return std::exp(amp) * std::cos(nu * u - x * cd * std::sinh(u));
    };
    return 0.5 * integrate_line(integrand, spec).value;
}

double bessel_k_imag(double r, double x) {
    return std::exp(-kPi * std::abs(r) / 2) * bessel_k_imag_scaled(r, x);
}

}  // namespace spectral::specfun
