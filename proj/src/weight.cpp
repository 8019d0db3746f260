#include "spectral/weight.hpp"

#include <cmath>

namespace spectral {

double weight_h(double r, double K, double G) {
    const double r2 = r * r;
    const double a = (r - K) / G, b = (r + K) / G;
    return (r2 + 0.25) / (r2 + 1000.0) * (std::exp(-a * a) + std::exp(-b * b));
}

std::complex<double> weight_h(std::complex<double> r, double K, double G) {
    const auto r2 = r * r;
    const auto a = (r - K) / G, b = (r + K) / G;
    return (r2 + 0.25) / (r2 + 1000.0) * (std::exp(-a * a) + std::exp(-b * b));
}

std::complex<double> weight_h_prime(std::complex<double> r, double K, double G) {
    const auto r2 = r * r;
    const auto a = (r - K) / G, b = (r + K) / G;
    const auto ea = std::exp(-a * a), eb = std::exp(-b * b);
    // d/dr (r^2 + 1/4)/(r^2 + 1000) = 2r (1000 - 1/4) / (r^2 + 1000)^2
    const auto rational = (r2 + 0.25) / (r2 + 1000.0);
    const auto rational_prime = 2.0 * r * (1000.0 - 0.25) / ((r2 + 1000.0) * (r2 + 1000.0));
    const auto gauss_prime = -2.0 * a / G * ea - 2.0 * b / G * eb;
    return rational_prime * (ea + eb) + rational * gauss_prime;
}

}  // namespace spectral
