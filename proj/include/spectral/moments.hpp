#pragma once

#include <array>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "spectral/lvalues.hpp"
#include "spectral/spectra.hpp"
#include "spectral/trace.hpp"

namespace spectral::moments {

using specfun::cplx;

// Omega(r) = (1 / sqrt(pi) G) int_T^{T+H} h(r, K, G) dK
struct WeightSpec {
    double T = 18.0;
    double H = 6.0;
    double G = 2.0;

    // G <= H <= T, all positive. The de-smoothing lemma wants G <= H / log T;
    // that is reported by log_condition(), not enforced.
    void validate() const;
    double log_condition() const;  // G log T / H, <= 1 in the lemma's regime
    // where the spectrum must be complete for the Omega-weighted sums
    double complete_lo() const { return std::max(0.0, T - 6 * G); }
    double complete_hi() const { return T + H + 6 * G; }
};

// Closed form through erf/erfc (the K-integral of a Gaussian). Differences of
// erf are taken through erfc when both arguments share a sign, so the value
// keeps full relative accuracy far outside [T, T + H].
double weight_omega(double r, const WeightSpec& spec);

// (r^2 + 1/4) / (r^2 + 1000): Omega(r) tends to this, not to 1, inside the window.
double weight_rational(double r);

// Per-form quantities shared by all moment computations.
struct FormValue {
    const spectra::MaassForm* form = nullptr;
    double kappa = 0.0;
    double alpha = 0.0;
    double alpha_err = 0.0;  // propagated from l_sym2_err
    lvalues::CentralValue central;
};

struct SpectralValues {
    std::vector<FormValue> even;  // ascending kappa
    spectra::Window window;
    int depth = 0;
};

// alpha_j and L_j(1/2) for every even form inside the declared window, in dataset
// order. Forms past the window are not known to be complete and are left out.
SpectralValues evaluate_even_forms(const spectra::SpectralDataset& ds,
                                   const lvalues::AfeConfig& afe = {}, int threads = 1);

// sum_j weight(kappa_j) alpha_j t_j(l) L_j(1/2)^order, summed in kappa order.
double moment_weighted(const SpectralValues& v, long l, int order,
                       const std::function<double(double)>& weight);

// Omega-smoothed twisted moment; needs the spectrum complete on
// [T - 6G, T + H + 6G] and l <= depth.
double moment_spectral(const SpectralValues& v, long l, const WeightSpec& spec, int order);
double moment_spectral(const spectra::SpectralDataset& ds, long l, const WeightSpec& spec, int order,
                       const lvalues::AfeConfig& afe = {}, int threads = 1);

// (2 / (pi^2 sqrt l)) int_T^{T+H} K dK
double m1_main(long l, const WeightSpec& spec);
// (4/pi^2)(tau(l)/sqrt l) int_T^{T+H} K (gamma - log(2 pi sqrt l) + log K) dK
double m2_main(long l, const WeightSpec& spec);
// the same integrals with K replaced by K w(K), w the rational factor of h
double m1_main_rational(long l, const WeightSpec& spec);
double m2_main_rational(long l, const WeightSpec& spec);

// Exponent alpha of the second-moment error term for H = T^beta, theta = 13/84:
// 0 for beta >= 2/3, 2 theta for 1273/4053 <= beta < 2/3, 4 theta below. The
// theorem's boundaries carry "+ eps"; each boundary goes to the smaller alpha.
double alpha_exponent(double beta);
inline constexpr double kTheta = 13.0 / 84.0;

struct MomentReport {
    long l = 1;
    int order = 1;
    double spectral = 0.0;
    double main_term = 0.0;
    double residual = 0.0;      // spectral - main_term
    double rel_residual = 0.0;  // residual / main_term
    double ratio = 0.0;         // spectral / main_term
    double band_lo = 0.0;
    double band_hi = 0.0;
    bool within_band = false;
    double error_shape = 0.0;   // theorem's error term / main term, constants 1, eps = 0
    double rational_main = 0.0; // main term with the w(K) factor kept
    double rational_ratio = 0.0;
    std::string tolerance_note;
    WeightSpec params;
    spectra::Window window;
};

MomentReport moment_report(const SpectralValues& v, long l, const WeightSpec& spec, int order);

// ---------------------------------------------------------------- explicit formula

// hhat(s) = int r h(r) Gamma(s + ir) / Gamma(1 - s + ir) dr and its first two
// s-derivatives. The r-contour is moved to Im r = -max(1/2, 1/2 - Re s), below
// every pole of Gamma(s + ir); this is the entire continuation (on the real line
// the integral only converges for Re s > 0).
struct HHat {
    cplx value;
    double delta = 0.0;   // quadrature certificate
    double l1 = 0.0;      // int |integrand|, the rounding scale
};
HHat h_hat(cplx s, const trace::TestFunction& g, int deriv = 0);
inline constexpr double kHHatMaxImag = 150.0;

// Psi^+(x) = int_(c) Gamma(1/2 - s)^2 tan(pi s) hhat(s) x^s ds
// Psi^-(x) = int_(c) Gamma(1/2 - s)^2 hhat(s) / cos(pi s) x^s ds
// ds = i dt along Re s = c. The line values of hhat are tabulated once and
// refined on demand, so one PsiLine serves any number of x.
class PsiLine {
public:
    PsiLine(const trace::TestFunction& g, double c, int threads = 1, double radius_scale = 1.0);

    struct Value {
        cplx value;
        double delta = 0.0;  // trapezoid step-halving difference
    };
    Value operator()(trace::Sign sign, double x) const;
    // int |Gamma(1/2 - s)^2 trig(s) hhat(s)| dt: |Psi(x)| <= x^c times this
    double abs_integral(trace::Sign sign) const;
    double c() const { return c_; }
    double radius() const { return radius_; }

private:
    struct Level {
        std::vector<cplx> base;  // Gamma(1/2 - s)^2 hhat(s) at the new nodes of this level
    };
    void ensure_level(std::size_t lvl) const;
    cplx node_value(double t) const;
    double node_step(std::size_t lvl) const;

    trace::TestFunction g_;
    double c_;
    int threads_;
    double radius_;
    double step0_;
    mutable std::mutex mu_;
    mutable std::vector<Level> levels_;
};

void check_psi_abscissa(double c);  // DomainError outside (-0.45, 0.45)
cplx psi(trace::Sign sign, double x, const trace::TestFunction& g, double c = 0.0);

// |Psi^{+-}(x)| <= B x^{c'} + sum_k rho_k x^{-1/2-k} for every x > 0, from
// moving the line to c' = -6 (tan / sec poles at s = -3/2, ..., -11/2 crossed).
struct PsiTailBound {
    double c_far = -6.0;
    double B_plus = 0.0;
    double B_minus = 0.0;
    std::array<double, 5> rho{};  // 2 (k!)^2 |hhat(-1/2 - k)|, k = 1..5
    double operator()(trace::Sign sign, double x) const;
};
PsiTailBound psi_tail_bound(const trace::TestFunction& g, int threads = 1);

// tau(n) <= C n^{1/4} for all n (product over p < 16 of max_k (k+1) p^{-k/4}).
double divisor_bound_quarter();

struct ExplicitOptions {
    double c = 0.0;               // Psi line abscissa, inside (-0.45, 0.45)
    double tail_target = 1e-10;   // certified R2 / R3 tails
    double radius_scale = 1.0;    // multiplies every truncation radius
    int max_terms = 200000;
    int threads = 1;
};

struct Truncations {
    int r2_terms = 0;
    int r3_terms = 0;
    double r2_tail = 0.0;
    double r3_tail = 0.0;
    double psi_delta = 0.0;    // sum of weight * delta over every Psi value used
    double hhat_delta = 0.0;   // R1 derivatives
    double r7_delta = 0.0;
    double r7_radius = 0.0;
    double psi_radius = 0.0;
    double max_certificate() const;
};

struct ExplicitTerms {
    std::array<double, 7> r{};  // R1..R7
    double lhs = 0.0;           // sum_j alpha_j t_j(l) L_j(1/2)^2 h(kappa_j)
    double lhs_err = 0.0;
    double residual = 0.0;      // lhs - sum r
    double r1_closed = 0.0;     // 4KG/pi^{3/2} (tau(l)/sqrt l)(gamma - log(2 pi sqrt l) + log K)
    double r1_closed_rational = 0.0;  // the same times w(K)
    Truncations truncations;
    long l = 1;
    trace::TestFunction g;

    double sum() const;
    double rel_residual() const { return std::abs(residual) / std::abs(lhs); }
};

double r1_closed_form(long l, const trace::TestFunction& g);

ExplicitTerms explicit_terms(const SpectralValues& v, long l, const trace::TestFunction& g,
                             const ExplicitOptions& opt = {});

}  // namespace spectral::moments
