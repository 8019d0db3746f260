#pragma once

#include "spectral/specfun.hpp"
#include "spectral/spectra.hpp"

namespace spectral::lvalues {

using specfun::cplx;

// G(x) in the approximate functional equation. Both are even with G(0) = 1.
enum class Kernel {
    gaussian,  // exp(b x^2): V(n, t) falls off like exp(-log^2(n / n0) / 4b)
    quartic,   // exp(-x^4)
};

struct AfeConfig {
    double delta = 0.5;  // contour abscissa
    specfun::QuadratureSpec quad{0.25, 0.0, 1e-12, 0.0, 12};  // radius 0 = automatic
    double tail_cut = 1e-12;
    Kernel kernel = Kernel::gaussian;
    double kernel_b = 0.05;

    void validate() const;
};

struct CentralValue {
    double value = 0.0;
    double err_estimate = 0.0;
    int terms_used = 0;
};

// pi^{-x} Gamma(1/4 + x/2 - it/2) Gamma(1/4 + x/2 + it/2) / (Gamma(1/4 - it/2) Gamma(1/4 + it/2))
cplx gamma_factor(cplx x, double t);

double v_weight(long n, double t, const AfeConfig& cfg = {});

// L(1/2) for an even form. N* is the first index where the certified tail
// bound drops below cfg.tail_cut.
CentralValue central_value(const spectra::MaassForm& form, const AfeConfig& cfg = {});

// Envelope |V(n, t)| <= min_c B(c) n^{-c}; exposed for diagnostics.
double v_envelope(double n, double t, const AfeConfig& cfg = {});

// Decision rule for counting non-vanishing: value > factor * err_estimate.
struct ThresholdPolicy {
    double factor = 10.0;
    bool nonzero(const CentralValue& cv) const { return cv.value > factor * cv.err_estimate; }
};

}  // namespace spectral::lvalues
