#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <type_traits>

#include "spectral/errors.hpp"

namespace spectral::specfun {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

/// Principal branch of log Gamma(z), analytic on C minus (-inf, 0].
/// On the negative real axis the value is the limit from the upper half plane.
/// Throws DomainError at the poles z = 0, -1, -2, ...
cplx log_gamma(cplx z);

/// psi(z) for k = 0 and psi'(z) for k = 1.
cplx polygamma(int k, cplx z);

/// Riemann zeta by Euler-Maclaurin summation.
/// Envelope: Re s >= 1/2 and |Im s| <= 500 (RangeError outside), s != 1.
cplx zeta(cplx s);

/// J_{2ir}(x) for real r, |r| <= 60 and 0 < x <= kBesselJMaxArg.
/// The ascending series is summed in binary128 because its terms grow to
/// roughly e^x before cancelling.
cplx bessel_j_imag(double r, double x);
inline constexpr double kBesselJMaxArg = 60.0;

/// K_{ir}(x) for real r and x > 0, from the integral of exp(-x cosh u) cos(ru).
double bessel_k_imag(double r, double x);

/// exp(pi |r| / 2) K_{ir}(x). Same integral with the contour lifted towards
/// Im u = pi/2, which removes the exp(-pi |r| / 2) cancellation for r > x.
double bessel_k_imag_scaled(double r, double x);

/// Trapezoid rule on [center - radius, center + radius] with node spacing
/// `step`, refined by step halving until two successive values differ by
/// less than target_abs_tol.
struct QuadratureSpec {
    double step = 0.05;
    double radius = 10.0;
    double target_abs_tol = 1e-12;
    double center = 0.0;
    int max_refinements = 12;

    void validate() const;
};

template <class T>
struct LineIntegral {
    T value{};
    double delta = 0.0;  // |I(step) - I(step/2)| at the accepted level
    double step = 0.0;   // spacing of the accepted estimate
    long evaluations = 0;
};

namespace detail {
[[noreturn]] void throw_no_convergence(double delta, double tol);
}

template <class F>
auto integrate_line(F&& f, const QuadratureSpec& spec)
    -> LineIntegral<std::decay_t<decltype(f(0.0))>> {
    using T = std::decay_t<decltype(f(0.0))>;
    spec.validate();
    double h = spec.step;
    long n = static_cast<long>(std::floor(spec.radius / h));
    T sum = f(spec.center);
    for (long k = 1; k <= n; ++k) {
        sum += f(spec.center + k * h);
        sum += f(spec.center - k * h);
    }
    long evals = 2 * n + 1;
    T estimate = sum * h;
    double delta = 0.0;
    for (int level = 0; level < spec.max_refinements; ++level) {
        const double half = h / 2;
        T fresh{};
        for (long k = 0; k < n; ++k) {
            const double u = (k + 0.5) * h;
            fresh += f(spec.center + u);
            fresh += f(spec.center - u);
        }
        evals += 2 * n;
        sum += fresh;
        const T refined = sum * half;
        delta = std::abs(refined - estimate);
        estimate = refined;
        h = half;
        n *= 2;
        if (delta < spec.target_abs_tol) {
            return {estimate, delta, h, evals};
        }
    }
    detail::throw_no_convergence(delta, spec.target_abs_tol);
}

}  // namespace spectral::specfun
