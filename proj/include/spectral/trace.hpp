#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "spectral/arith.hpp"
#include "spectral/spectra.hpp"

namespace spectral::trace {

// g(r) = h(r, K, G), the weight of the moment computations.
struct TestFunction {
    double K = 16.0;
    double G = 2.0;

    void validate() const;
    double operator()(double r) const;
    double support_lo() const { return std::max(0.0, K - 8 * G); }
    double support_hi() const { return K + 8 * G; }
    double quad_radius() const { return K + 12 * G; }  // |r| beyond this is dropped
};

enum class Sign { plus, minus };

struct Transform {
    double value = 0.0;
    double imag_residue = 0.0;  // |Im| of the raw complex integral (plus only)
    double delta = 0.0;         // step-halving certificate
};

// H^+(x) = (2i/pi) int r J_{2ir}(x) g(r) / cosh(pi r) dr
// H^-(x) = (4/pi^2) int sinh(pi r) K_{2ir}(x) r g(r) dr
Transform bessel_transform(Sign sign, double x, const TestFunction& g);

// |H^{+-}(x)| <= C x^{2 sigma} + (residues) for 0 < x <= x_max, from moving the
// r-contour down to Im r = -sigma. Valid for both signs.
double transform_envelope(double x, double x_max, const TestFunction& g);

struct TraceParams {
    std::int64_t m = 1;
    std::int64_t n = 1;
    double K = 0.0;
    double G = 0.0;
    int Q = 0;
    spectra::Window window;
};

struct TraceReport {
    double spectral = 0.0;
    double eisenstein = 0.0;   // +(1/pi) int sigma sigma / ((mn)^{it} |zeta(1+2it)|^2) g dt
    double diagonal = 0.0;
    double kloosterman = 0.0;
    double residual = 0.0;     // spectral + eisenstein - diagonal - kloosterman
    double outside_mass = 0.0; // bound on spectral mass outside the dataset window
    double q_tail = 0.0;       // bound on the dropped q > Q terms
    TraceParams params;

    double max_component() const;
    double relative_residual() const { return std::abs(residual) / max_component(); }
};

inline constexpr double kOutsideMassLimit = 1e-10;
inline constexpr double kQTailLimit = 1e-8;

// Certified tail of the Kloosterman series past Q.
double q_tail_bound(std::int64_t m, std::int64_t n, const TestFunction& g, int Q);
// Smallest Q whose tail bound is below kQTailLimit.
int minimal_q(std::int64_t m, std::int64_t n, const TestFunction& g);

// Both sides of the trace formula over the even spectrum. Q <= 0 picks minimal_q.
TraceReport sides(const spectra::SpectralDataset& ds, std::int64_t m, std::int64_t n,
                  const TestFunction& g, int Q = 0);

std::vector<TraceReport> verify_grid(const spectra::SpectralDataset& ds,
                                     const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
                                     const TestFunction& g, int Q = 0, int threads = 1);

}  // namespace spectral::trace
