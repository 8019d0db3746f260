#include "spectral/trace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "spectral/errors.hpp"
#include "spectral/parallel.hpp"
#include "spectral/weight.hpp"

namespace spectral::trace {

using specfun::cplx;
using specfun::kPi;

namespace {

constexpr double kShift = 4.0;  // contour depth for the transform envelope, between poles 3.5 and 4.5

// Bound on the number of forms (either parity) with kappa in [T, T + 1].
double local_count_bound(double T) { return (T + 1.0) / 3.0 + 10.0; }
constexpr double kAlphaBound = 10.0;


}  // namespace

void TestFunction::validate() const {
    if (!(K > 0.0) || !(G > 0.0)) {
        throw DomainError("TestFunction: K and G must be positive");
    }
}

double TestFunction::operator()(double r) const { return weight_h(r, K, G); }

Transform bessel_transform(Sign sign, double x, const TestFunction& g) {
    g.validate();
    if (!(x > 0.0)) throw DomainError("bessel_transform: x must be positive");
    specfun::QuadratureSpec q;
    q.radius = g.quad_radius();
    q.step = std::min(0.2, g.G / 8);
    q.target_abs_tol = 1e-11;
    q.max_refinements = 10;
    Transform out;
    if (sign == Sign::plus) {
        if (x > specfun::kBesselJMaxArg) {
            throw RangeError("bessel_transform: H+ needs x <= 60");
        }
        const auto f = [&](double r) -> cplx {
            if (r == 0.0) return 0.0;
            return r * specfun::bessel_j_imag(r, x) * (g(r) / std::cosh(kPi * r));
        };
        const auto I = specfun::integrate_line(f, q);
        const cplx v = cplx(0.0, 2.0 / kPi) * I.value;
        out.value = v.real();
        out.imag_residue = std::abs(v.imag());
        out.delta = 2.0 / kPi * I.delta;
    } else {
        // sinh(pi r) K_{2ir}(x) = sign(r) (1 - e^{-2 pi |r|}) / 2 * scaled K
        const auto f = [&](double r) {
            if (r == 0.0) return 0.0;
            const double s = (r > 0 ? 0.5 : -0.5) * -std::expm1(-2 * kPi * std::abs(r));
            return s * specfun::bessel_k_imag_scaled(2 * r, x) * r * g(r);
        };
        const auto I = specfun::integrate_line(f, q);
        out.value = 4.0 / (kPi * kPi) * I.value;
        out.delta = 4.0 / (kPi * kPi) * I.delta;
    }
    return out;
}

namespace {

// C in |H(x)| <= C x^{2 sigma}, for x <= x_max
double envelope_constant(const TestFunction& g, double x_max) {
    const double s = kShift;
    specfun::QuadratureSpec q;
    q.radius = g.quad_radius() + 10;
    q.step = 0.25;
    const auto f = [&](double r) {
        const cplx z(r, -s);
        const double lg = specfun::log_gamma(cplx(1.0 + 2 * s, 2 * r)).real();
        const double ch = std::sqrt(std::sinh(kPi * r) * std::sinh(kPi * r) +
                                    std::cos(kPi * s) * std::cos(kPi * s));
        return std::abs(z) * std::abs(weight_h(z, g.K, g.G)) * std::exp(-lg) / ch;
    };
    q.target_abs_tol = 1e-3 * std::max(1e-300, f(g.K));
    const double integral = specfun::integrate_line(f, q).value;
    return 1.01 * (2.0 / kPi) * std::pow(0.5, 2 * s) * std::exp(x_max * x_max / (4 * (2 * s + 1))) *
           integral;
}

// residues of 1/cosh at r = -i (j + 1/2), j = 1..3 (j = 0 is cancelled by h)
std::vector<std::pair<int, double>> residue_terms(const TestFunction& g, double x_max) {
    std::vector<std::pair<int, double>> out;
    for (int j = 1; j < 4; ++j) {
        const double rj = j + 0.5;
        const int p = 2 * j + 1;
        const double coeff = 4.0 / kPi * rj * std::abs(weight_h(cplx(0.0, -rj), g.K, g.G)) *
                             std::pow(0.5, p) / std::tgamma(p + 1.0) *
                             std::exp(x_max * x_max / (8.0 * (j + 1)));
        out.emplace_back(p, coeff);
    }
    return out;
}

}  // namespace

double transform_envelope(double x, double x_max, const TestFunction& g) {
    g.validate();
    if (x > x_max) throw DomainError("transform_envelope: x above x_max");
    double e = envelope_constant(g, x_max) * std::pow(x, 2 * kShift);
    for (const auto& [p, c] : residue_terms(g, x_max)) e += c * std::pow(x, p);
    return e;
}

double q_tail_bound(std::int64_t m, std::int64_t n, const TestFunction& g, int Q) {
    if (Q < 1) throw DomainError("q_tail_bound: Q >= 1");
    const double X = 4 * kPi * std::sqrt(static_cast<double>(m) * static_cast<double>(n));
    const double x_max = X / (Q + 1);
    const double root_gcd = std::sqrt(static_cast<double>(std::gcd(m, n)));
    // per q: (1/2q)(|S(m,n;q)| + |S(m,-n;q)|) E(x_q) <= 2 sqrt(gcd) E(x_q), tau(q) <= 2 sqrt(q)
    const auto power_tail = [&](int p) {
        return std::pow(X, p) * std::pow(static_cast<double>(Q), 1.0 - p) / (p - 1.0);
    };
    double tail = envelope_constant(g, x_max) * power_tail(static_cast<int>(2 * kShift));
    for (const auto& [p, c] : residue_terms(g, x_max)) tail += c * power_tail(p);
    return 2 * root_gcd * tail;
}

int minimal_q(std::int64_t m, std::int64_t n, const TestFunction& g) {
    for (int Q = 1; Q < 100000; Q = std::max(Q + 1, Q * 11 / 10)) {
        if (q_tail_bound(m, n, g, Q) < kQTailLimit) {
            // step back linearly to the first passing Q
            while (Q > 1 && q_tail_bound(m, n, g, Q - 1) < kQTailLimit) --Q;
            return Q;
        }
    }
    throw CapacityError("minimal_q: no Q below 1e5 certifies the Kloosterman tail");
}

double TraceReport::max_component() const {
    return std::max({std::abs(spectral), std::abs(eisenstein), std::abs(diagonal), std::abs(kloosterman),
                     1e-300});
}

namespace {

double outside_mass(const spectra::SpectralDataset& ds, std::int64_t m, std::int64_t n,
                    const TestFunction& g) {
    arith::FactorTable ft(std::max<std::int64_t>({m, n, 2}));
    const double coeff_bound = arith::tau(m, ft) * arith::tau(n, ft) *
                               std::pow(static_cast<double>(m * n), spectra::kKimSarnakTheta);
    const auto g_max = [&](double a, double b) {
        // g is unimodal on r >= 0 around K (the rational factor is increasing)
        const double c = std::clamp(g.K, a, b);
        return std::max({g(a), g(b), g(c)});
    };
    double mass = 0.0;
    for (double T = 0.0; T < ds.window.kappa_min; T += 1.0) {
        mass += local_count_bound(T) * g_max(T, std::min(T + 1.0, ds.window.kappa_min));
    }
    for (double T = ds.window.kappa_max;; T += 1.0) {
        const double piece = local_count_bound(T) * g_max(T, T + 1.0);
        mass += piece;
        if (T > g.K && piece < 1e-30) break;
    }
    return mass * kAlphaBound * coeff_bound;
}

}  // namespace

TraceReport sides(const spectra::SpectralDataset& ds, std::int64_t m, std::int64_t n,
                  const TestFunction& g, int Q) {
    g.validate();
    if (m < 1 || n < 1) throw DomainError("sides: m, n >= 1");
    if (m > ds.depth || n > ds.depth) {
        throw CapacityError("sides: m, n must not exceed the coefficient depth");
    }
    if (Q <= 0) Q = minimal_q(m, n, g);
    TraceReport rep;
    rep.params = {m, n, g.K, g.G, Q, ds.window};

    ds.require_complete(g.support_lo(), g.support_hi(), "sides");
    rep.outside_mass = outside_mass(ds, m, n, g);
    if (!(rep.outside_mass < kOutsideMassLimit)) {
        std::ostringstream os;
        os << "sides: spectral mass outside the dataset window is only bounded by " << rep.outside_mass
           << " (> 1e-10); g has effective support [" << g.support_lo() << ", " << g.support_hi()
           << "], window [" << ds.window.kappa_min << ", " << ds.window.kappa_max << "]";
        throw CapacityError(os.str());
    }
    rep.q_tail = q_tail_bound(m, n, g, Q);
    if (!(rep.q_tail < kQTailLimit)) {
        throw CapacityError("sides: Kloosterman tail past Q=" + std::to_string(Q) +
                            " is not certified below 1e-8; use Q >= " + std::to_string(minimal_q(m, n, g)));
    }

    // spectral side, even forms inside the window
    for (const auto* f : ds.even_forms()) {
        if (!ds.window.contains(f->kappa)) continue;
        const double alpha = spectra::harmonic_weight(*f).alpha;
        rep.spectral += alpha * f->t(m) * f->t(n) * g(f->kappa);
    }

    // continuous spectrum
    arith::FactorTable ft(std::max<std::int64_t>({m, n, 2}));
    const double log_mn = std::log(static_cast<double>(m * n));
    specfun::QuadratureSpec qe;
    qe.radius = g.quad_radius();
    qe.step = std::min(0.2, g.G / 8);
    qe.target_abs_tol = 1e-13;
    const auto eis = [&](double t) {
        if (t == 0.0) return 0.0;  // 1/|zeta(1 + 2it)|^2 has a double zero here
        const cplx a(0.0, 2 * t);
        const cplx num = arith::sigma(a, m, ft) * arith::sigma(a, n, ft) * std::exp(cplx(0.0, -t * log_mn));
        return num.real() / std::norm(specfun::zeta(cplx(1.0, 2 * t))) * g(t);
    };
    rep.eisenstein = specfun::integrate_line(eis, qe).value / kPi;

    if (m == n) {
        const auto diag = [&](double t) { return t * std::tanh(kPi * t) * g(t); };
        rep.diagonal = specfun::integrate_line(diag, qe).value / (2 * kPi * kPi);
    }

    const double X = 4 * kPi * std::sqrt(static_cast<double>(m) * static_cast<double>(n));
    for (int q = 1; q <= Q; ++q) {
        const double x = X / q;
        const double s_plus = arith::kloosterman(m, n, q);
        const double s_minus = arith::kloosterman(m, -n, q);
        double term = 0.0;
        if (s_plus != 0.0) term += s_plus * bessel_transform(Sign::plus, x, g).value;
        if (s_minus != 0.0) term += s_minus * bessel_transform(Sign::minus, x, g).value;
        rep.kloosterman += term / (2.0 * q);
    }
    rep.residual = rep.spectral + rep.eisenstein - rep.diagonal - rep.kloosterman;
    return rep;
}

std::vector<TraceReport> verify_grid(const spectra::SpectralDataset& ds,
                                     const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
                                     const TestFunction& g, int Q, int threads) {
    std::vector<TraceReport> out(pairs.size());
    parallel_for(pairs.size(), threads,
                 [&](std::size_t i) { out[i] = sides(ds, pairs[i].first, pairs[i].second, g, Q); });
    return out;
}

}  // namespace spectral::trace
