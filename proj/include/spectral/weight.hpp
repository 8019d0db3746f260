#pragma once

#include <complex>

namespace spectral {

// h(r, K, G) = (r^2 + 1/4)/(r^2 + 1000) * [exp(-((r - K)/G)^2) + exp(-((r + K)/G)^2)]
// The rational prefactor vanishes at r = +-i/2, which keeps the Kuznetsov
// transforms free of the first pole of 1/cosh(pi r).
double weight_h(double r, double K, double G);
std::complex<double> weight_h(std::complex<double> r, double K, double G);
// d/dr of the entire continuation
std::complex<double> weight_h_prime(std::complex<double> r, double K, double G);

}  // namespace spectral
