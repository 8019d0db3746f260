#include "spectral/lvalues.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "spectral/errors.hpp"

namespace spectral::lvalues {

using specfun::kPi;
using specfun::log_gamma;

void AfeConfig::validate() const {
    if (!(delta > 0.0) || delta > 2.0) throw DomainError("AfeConfig: delta must lie in (0, 2]");
    if (!(tail_cut > 0.0)) throw DomainError("AfeConfig: tail_cut must be positive");
    if (kernel == Kernel::gaussian && !(kernel_b > 0.0)) {
        throw DomainError("AfeConfig: kernel_b must be positive");
    }
    if (!(quad.step > 0.0) || !(quad.target_abs_tol > 0.0) || quad.radius < 0.0) {
        throw DomainError("AfeConfig: invalid quadrature settings");
    }
}

namespace {

cplx log_gamma_ratio(cplx x, double t) {
    const cplx it(0.0, t / 2);
    return -x * std::log(kPi) + log_gamma(0.25 + x / 2.0 - it) + log_gamma(0.25 + x / 2.0 + it) -
           log_gamma(0.25 - it) - log_gamma(0.25 + it);
}

cplx log_kernel(cplx x, const AfeConfig& cfg) {
    if (cfg.kernel == Kernel::gaussian) return cfg.kernel_b * x * x;
    const cplx x2 = x * x;
    return -x2 * x2;
}

// log of |G(x) gamma(x, t) / x| on Re x = c
double log_integrand_size(double c, double y, double t, const AfeConfig& cfg) {
    const cplx x(c, y);
    return (log_kernel(x, cfg) + log_gamma_ratio(x, t)).real() - std::log(std::abs(x));
}

// Truncation half-length for the line Re x = c: past it the integrand stays
// below exp(log_floor) times its size at y = 0.
double line_radius(double c, double t, const AfeConfig& cfg, double log_floor) {
    const double top = log_integrand_size(c, 0.0, t, cfg);
    double last = 0.0;
    // past |y| ~ t every factor decays monotonically; a long quiet stretch ends the scan
    for (double y = 0.0; y <= 4000.0; y += 1.0) {
        if (log_integrand_size(c, y, t, cfg) > top + log_floor) last = y;
        if (y > 2 * t + 4 * c + 50 && y - last > 50) break;
    }
    return last + 2.0;
}

// B(c) = (1/2pi) int |G gamma / x| dy on Re x = c (slightly inflated)
double envelope_constant(double c, double t, const AfeConfig& cfg) {
    specfun::QuadratureSpec q;
    q.radius = line_radius(c, t, cfg, -40.0);
    q.step = 0.5;
    const auto f = [&](double y) { return std::exp(log_integrand_size(c, y, t, cfg)); };
    q.target_abs_tol = 1e-4 * f(0.0);
    return 1.02 * specfun::integrate_line(f, q).value / (2 * kPi);
}

struct Envelope {
    std::vector<std::pair<double, double>> bounds;  // (c, B(c))

    Envelope(double t, const AfeConfig& cfg) {
        for (double c = 1.0; c <= 40.0; c += 1.0) {
            // the quartic kernel explodes off the real axis; stop once B(c) is useless
            const double b = envelope_constant(c, t, cfg);
            if (!std::isfinite(b)) break;
            bounds.emplace_back(c, b);
        }
    }
    double at(double n) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [c, b] : bounds) best = std::min(best, b * std::pow(n, -c));
        return best;
    }
    // sum_{n > N} sigma_0(n) n^{theta - 1/2} |V(n)| with sigma_0(n) <= 2 sqrt(n)
    double tail(double N) const {
        constexpr double theta = spectra::kKimSarnakTheta;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [c, b] : bounds) {
            if (c <= 1.0 + theta) continue;
            best = std::min(best, 2.0 * b * std::pow(N, 1.0 + theta - c) / (c - 1.0 - theta));
        }
        return best;
    }
};

specfun::QuadratureSpec line_spec(double t, const AfeConfig& cfg, double tol) {
    specfun::QuadratureSpec q = cfg.quad;
    if (q.radius == 0.0) q.radius = line_radius(cfg.delta, t, cfg, std::log(1e-18));
    q.target_abs_tol = tol;
    return q;
}

}  // namespace

cplx gamma_factor(cplx x, double t) {
    return std::exp(log_gamma_ratio(x, t));
}

double v_envelope(double n, double t, const AfeConfig& cfg) {
    cfg.validate();
    return Envelope(t, cfg).at(n);
}

double v_weight(long n, double t, const AfeConfig& cfg) {
    cfg.validate();
    if (n < 1) throw DomainError("v_weight: n must be >= 1");
    if (!(t > 0.0)) throw DomainError("v_weight: t must be positive");
    const double logn = std::log(static_cast<double>(n));
    const auto f = [&](double y) {
        const cplx x(cfg.delta, y);
        return std::exp(log_kernel(x, cfg) + log_gamma_ratio(x, t) - x * logn) / x;
    };
    const auto r = specfun::integrate_line(f, line_spec(t, cfg, cfg.quad.target_abs_tol));
    // dx = i dy cancels the i in 1/(2 pi i)
    return r.value.real() / (2 * kPi);
}

CentralValue central_value(const spectra::MaassForm& form, const AfeConfig& cfg) {
    cfg.validate();
    if (!form.even()) {
        throw DomainError("central_value: odd form (root number -1 forces L(1/2) = 0)");
    }
    const double t = form.kappa;
    const Envelope env(t, cfg);
    int n_star = 0;
    double tail = 0.0;
    for (int N = 1; N <= 1 << 24; ++N) {
        tail = env.tail(N);
        if (tail < cfg.tail_cut) {
            n_star = N;
            break;
        }
    }
    if (n_star == 0) {
        throw AccuracyError("central_value: tail bound never falls below tail_cut", tail);
    }
    if (n_star > form.depth()) {
        throw CapacityError("central_value: kappa=" + std::to_string(t) + " needs depth N >= " +
                            std::to_string(n_star) + ", have " + std::to_string(form.depth()));
    }
    std::vector<double> logn(static_cast<std::size_t>(n_star) + 1, 0.0);
    for (int n = 1; n <= n_star; ++n) logn[n] = std::log(static_cast<double>(n));
    const auto f = [&](double y) {
        const cplx x(cfg.delta, y);
        cplx sum = 0.0;
        for (int n = n_star; n >= 1; --n) sum += form.t(n) * std::exp(-(0.5 + x) * logn[n]);
        return std::exp(log_kernel(x, cfg) + log_gamma_ratio(x, t)) / x * sum;
    };
    const auto r = specfun::integrate_line(f, line_spec(t, cfg, cfg.quad.target_abs_tol));
    CentralValue cv;
    cv.value = 2.0 * r.value.real() / (2 * kPi);
    cv.err_estimate = 2.0 * r.delta / (2 * kPi) + 2.0 * tail;
    cv.terms_used = n_star;
    return cv;
}

}  // namespace spectral::lvalues
