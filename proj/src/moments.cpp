#include "spectral/moments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "spectral/arith.hpp"
#include "spectral/errors.hpp"
#include "spectral/parallel.hpp"
#include "spectral/weight.hpp"

namespace spectral::moments {

using specfun::kEulerGamma;
using specfun::kPi;
using trace::Sign;

namespace {

constexpr cplx kI(0.0, 1.0);

// erf(a) - erf(b) for a >= b without cancellation in the tails
double erf_diff(double a, double b) {
    if (b >= 0.0) return std::erfc(b) - std::erfc(a);
    if (a <= 0.0) return std::erfc(-a) - std::erfc(-b);
    return std::erf(a) - std::erf(b);
}

void check_order(int order) {
    if (order != 1 && order != 2) throw DomainError("moment order must be 1 or 2");
}

void check_complete(const spectra::Window& w, double lo, double hi, const char* who) {
    if (lo < w.kappa_min || hi > w.kappa_max) {
        std::ostringstream os;
        os << who << ": needs spectrum complete on [" << lo << ", " << hi << "] but the dataset window is ["
           << w.kappa_min << ", " << w.kappa_max << "]";
        throw CapacityError(os.str());
    }
}

double t_of(const FormValue& f, long l) { return f.form->t(static_cast<std::int64_t>(l)); }

int tau_of(long n) {
    const arith::FactorTable ft(std::max<long>(n, 2));
    return arith::tau(n, ft);
}

// composite Simpson on [a, b]; only used for diagnostics with smooth integrands
template <class F>
double simpson(F&& f, double a, double b, int n = 4000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Trapezoid with a tolerance relative to int |f|; the coarse pass fixes the scale.
template <class F>
specfun::LineIntegral<cplx> integrate_relative(F&& f, double radius, double step, double rel, double* l1) {
    double scale = 0.0;
    const long n = static_cast<long>(std::floor(radius / step));
    for (long k = -n; k <= n; ++k) scale += std::abs(f(k * step));
    scale *= step;
    if (l1) *l1 = scale;
    specfun::QuadratureSpec q;
    q.radius = radius;
    q.step = step;
    q.target_abs_tol = std::max(rel * scale, 1e-300);
    q.max_refinements = 8;
    return specfun::integrate_line(f, q);
}

}  // namespace

// ---------------------------------------------------------------- weights

void WeightSpec::validate() const {
    if (!(T > 0.0) || !(H > 0.0) || !(G > 0.0)) throw DomainError("WeightSpec: T, H, G must be positive");
    if (G > H) throw DomainError("WeightSpec: need G <= H");
    if (H > T) throw DomainError("WeightSpec: need H <= T");
}

double WeightSpec::log_condition() const { return G * std::log(T) / H; }

double weight_rational(double r) { return (r * r + 0.25) / (r * r + 1000.0); }

double weight_omega(double r, const WeightSpec& spec) {
    spec.validate();
    const double T = spec.T, H = spec.H, G = spec.G;
    const double bumps = erf_diff((T + H - r) / G, (T - r) / G) + erf_diff((T + H + r) / G, (T + r) / G);
    return 0.5 * weight_rational(r) * bumps;
}

// ---------------------------------------------------------------- spectral side

SpectralValues evaluate_even_forms(const spectra::SpectralDataset& ds, const lvalues::AfeConfig& afe,
                                   int threads) {
    SpectralValues out;
    out.window = ds.window;
    out.depth = ds.depth;
    std::vector<const spectra::MaassForm*> even;
    for (const auto* f : ds.even_forms())
        if (ds.window.contains(f->kappa)) even.push_back(f);
    out.even.resize(even.size());
    parallel_for(even.size(), threads, [&](std::size_t i) {
        const auto& f = *even[i];
        const auto w = spectra::harmonic_weight(f);
        FormValue v;
        v.form = &f;
        v.kappa = f.kappa;
        v.alpha = w.alpha;
        v.alpha_err = w.alpha * w.l_sym2_err / w.l_sym2;
        v.central = lvalues::central_value(f, afe);
        out.even[i] = v;
    });
    return out;
}

double moment_weighted(const SpectralValues& v, long l, int order,
                       const std::function<double(double)>& weight) {
    check_order(order);
    if (l < 1) throw DomainError("moment: l >= 1 required");
    if (l > v.depth) {
        throw CapacityError("moment: t(l) for l = " + std::to_string(l) + " beyond coefficient depth " +
                            std::to_string(v.depth));
    }
    double sum = 0.0;
    for (const auto& f : v.even) {
        const double L = f.central.value;
        sum += weight(f.kappa) * f.alpha * t_of(f, l) * (order == 1 ? L : L * L);
    }
    return sum;
}

double moment_spectral(const SpectralValues& v, long l, const WeightSpec& spec, int order) {
    spec.validate();
    check_complete(v.window, spec.complete_lo(), spec.complete_hi(), "moment_spectral");
    return moment_weighted(v, l, order, [&](double r) { return weight_omega(r, spec); });
}

double moment_spectral(const spectra::SpectralDataset& ds, long l, const WeightSpec& spec, int order,
                       const lvalues::AfeConfig& afe, int threads) {
    spec.validate();
    check_complete(ds.window, spec.complete_lo(), spec.complete_hi(), "moment_spectral");
    return moment_spectral(evaluate_even_forms(ds, afe, threads), l, spec, order);
}

// ---------------------------------------------------------------- main terms

double m1_main(long l, const WeightSpec& spec) {
    if (l < 1) throw DomainError("m1_main: l >= 1");
    const double T = spec.T, H = spec.H;
    return 2.0 / (kPi * kPi * std::sqrt(static_cast<double>(l))) * (T * H + H * H / 2);
}

double m2_main(long l, const WeightSpec& spec) {
    if (l < 1) throw DomainError("m2_main: l >= 1");
    const double T = spec.T, H = spec.H;
    const double sl = std::sqrt(static_cast<double>(l));
    // int K log K dK = K^2/2 log K - K^2/4
    const auto F = [](double K) { return K > 0.0 ? K * K / 2 * std::log(K) - K * K / 4 : 0.0; };
    const double bracket = (kEulerGamma - std::log(2 * kPi * sl)) * (T * H + H * H / 2) + F(T + H) - F(T);
    return 4.0 / (kPi * kPi) * tau_of(l) / sl * bracket;
}

double m1_main_rational(long l, const WeightSpec& spec) {
    if (l < 1) throw DomainError("m1_main_rational: l >= 1");
    // int K w(K) dK = K^2/2 - (999.75/2) log(K^2 + 1000)
    const auto F = [](double K) { return K * K / 2 - 999.75 / 2 * std::log(K * K + 1000.0); };
    return 2.0 / (kPi * kPi * std::sqrt(static_cast<double>(l))) * (F(spec.T + spec.H) - F(spec.T));
}

double m2_main_rational(long l, const WeightSpec& spec) {
    if (l < 1) throw DomainError("m2_main_rational: l >= 1");
    const double sl = std::sqrt(static_cast<double>(l));
    const double shift = kEulerGamma - std::log(2 * kPi * sl);
    const double integral = simpson(
        [&](double K) { return K * weight_rational(K) * (shift + std::log(K)); }, spec.T, spec.T + spec.H);
    return 4.0 / (kPi * kPi) * tau_of(l) / sl * integral;
}

double alpha_exponent(double beta) {
    if (beta >= 2.0 / 3.0) return 0.0;
    if (beta >= 1273.0 / 4053.0) return 2 * kTheta;
    return 4 * kTheta;
}

MomentReport moment_report(const SpectralValues& v, long l, const WeightSpec& spec, int order) {
    MomentReport rep;
    rep.l = l;
    rep.order = order;
    rep.params = spec;
    rep.window = v.window;
    rep.spectral = moment_spectral(v, l, spec, order);
    rep.main_term = order == 1 ? m1_main(l, spec) : m2_main(l, spec);
    rep.residual = rep.spectral - rep.main_term;
    rep.rel_residual = rep.residual / rep.main_term;
    rep.ratio = rep.spectral / rep.main_term;
    rep.band_lo = order == 1 ? 0.75 : 0.6;
    rep.band_hi = order == 1 ? 1.25 : 1.4;
    rep.within_band = rep.ratio >= rep.band_lo && rep.ratio <= rep.band_hi;
    rep.rational_main = order == 1 ? m1_main_rational(l, spec) : m2_main_rational(l, spec);
    rep.rational_ratio = rep.spectral / rep.rational_main;

    const double T = spec.T, H = spec.H, G = spec.G, dl = static_cast<double>(l);
    double err = 0.0;
    std::ostringstream note;
    note << std::setprecision(3);
    if (order == 1) {
        // O((H + G) T^{1/2} + (HT / sqrt l)(l / T)^{1/2})
        err = (H + G) * std::sqrt(T) + H * T / std::sqrt(dl) * std::sqrt(dl / T);
        note << "error shape (H+G)T^1/2 + (HT/l^1/2)(l/T)^1/2";
    } else {
        const double beta = std::log(H) / std::log(T);
        const double a = alpha_exponent(beta);
        err = G * G * H / (std::sqrt(dl) * T) + std::pow(T, a) * (H + G) + std::pow(dl, 1.5) * H / (T * G * G) +
              std::sqrt(dl * T / H) + std::sqrt(dl * T / G);
        note << "error shape G^2H/(l^1/2 T) + T^alpha(H+G) + l^3/2 H/(TG^2) + (lT/H)^1/2 + (lT/G)^1/2 with alpha="
             << a << " (beta=" << beta << ")";
    }
    rep.error_shape = err / std::abs(rep.main_term);
    note << " at T=" << T << " H=" << H << " G=" << G << " l=" << l << ", implied constants 1, eps=0: "
         << rep.error_shape << " x main term";
    if (rep.error_shape >= 1.0) note << " (the theorem does not constrain the ratio at this scale)";
    {
        // admissible l: T^{1} for the first moment, T^{min(2 - 2 alpha, 1/2 + 3 beta / 2)} for the second
        const double beta = std::log(H) / std::log(T);
        const double expo = order == 1 ? 1.0 : std::min(2 - 2 * alpha_exponent(beta), 0.5 + 1.5 * beta);
        if (dl > std::pow(T, expo)) note << "; warning: l above T^" << expo << ", outside the admissible range";
        if (spec.log_condition() > 1.0)
            note << "; warning: G log T / H = " << spec.log_condition() << " > 1, de-smoothing regime not met";
    }
    note << "; acceptance band [" << rep.band_lo << ", " << rep.band_hi << "]";
    note << "; Omega(r) -> w(r) = (r^2+1/4)/(r^2+1000) inside the window, main term with w kept "
         << rep.rational_main << " (ratio " << rep.rational_ratio << ")";
    rep.tolerance_note = note.str();
    return rep;
}

// ---------------------------------------------------------------- hhat, Psi

HHat h_hat(cplx s, const trace::TestFunction& g, int deriv) {
    g.validate();
    if (deriv < 0 || deriv > 2) throw DomainError("h_hat: deriv must be 0, 1 or 2");
    if (std::abs(s.imag()) > kHHatMaxImag) throw RangeError("h_hat: |Im s| <= 150 supported");
    double eta = std::max(0.5, 0.5 - s.real());
    // keep Gamma(1 - s + ir) off its poles along the contour
    const double den_re = 1.0 - s.real() + eta;
    if (den_re <= 0.0 && den_re == std::floor(den_re)) eta += 0.25;
    using specfun::log_gamma;
    using specfun::polygamma;
    const auto f = [&](double x) -> cplx {
        const cplx r(x, -eta);
        const cplx a = s + kI * r, b = 1.0 - s + kI * r;
        cplx v = r * weight_h(r, g.K, g.G) * std::exp(log_gamma(a) - log_gamma(b));
        if (deriv >= 1) {
            const cplx p = polygamma(0, a) + polygamma(0, b);
            v *= deriv == 1 ? p : p * p + polygamma(1, a) - polygamma(1, b);
        }
        return v;
    };
    HHat out;
    const auto res = integrate_relative(f, g.quad_radius(), std::min(0.25, g.G / 8), 1e-13, &out.l1);
    out.value = res.value;
    out.delta = res.delta;
    return out;
}

void check_psi_abscissa(double c) {
    if (!(c > -0.45 && c < 0.45)) {
        throw DomainError("Psi: abscissa c must lie in (-0.45, 0.45), strictly inside the pole-free band");
    }
}

PsiLine::PsiLine(const trace::TestFunction& g, double c, int threads, double radius_scale)
    : g_(g), c_(c), threads_(threads), step0_(0.25) {
    g.validate();
    check_psi_abscissa(c);
    // |Gamma(1/2 - s)^2 hhat(s)| is flat up to |t| ~ K and then falls like
    // exp(-pi |t|); stop once it has stayed 1e-18 below its peak for 10 units.
    double peak = 0.0, last = 0.0;
    for (double t = 0.0; t <= kHHatMaxImag; t += 1.0) {
        const double m = std::max(std::abs(node_value(t)), std::abs(node_value(-t)));
        peak = std::max(peak, m);
        if (m > 1e-18 * peak) last = t;
        if (t > g.K && t - last >= 10.0) break;
    }
    radius_ = std::min(kHHatMaxImag, std::ceil((last + 2.0) * radius_scale / step0_) * step0_);
}

cplx PsiLine::node_value(double t) const {
    const cplx s(c_, t);
    return std::exp(2.0 * specfun::log_gamma(0.5 - s)) * h_hat(s, g_).value;
}

double PsiLine::node_step(std::size_t lvl) const { return step0_ / static_cast<double>(1u << lvl); }

void PsiLine::ensure_level(std::size_t lvl) const {
    std::lock_guard<std::mutex> lock(mu_);
    while (levels_.size() <= lvl) {
        const std::size_t L = levels_.size();
        const long n = std::lround(radius_ / step0_);
        std::vector<double> ts;
        if (L == 0) {
            for (long k = -n; k <= n; ++k) ts.push_back(k * step0_);
        } else {
            const double h = node_step(L);
            const long m = n << L;  // radius / h
            for (long k = -m + 1; k < m; k += 2) ts.push_back(k * h);
        }
        Level level;
        level.base.resize(ts.size());
        parallel_for(ts.size(), threads_, [&](std::size_t i) { level.base[i] = node_value(ts[i]); });
        levels_.push_back(std::move(level));
    }
}

namespace {

cplx trig_factor(Sign sign, cplx s) {
    return sign == Sign::plus ? std::tan(kPi * s) : 1.0 / std::cos(kPi * s);
}

}  // namespace

PsiLine::Value PsiLine::operator()(Sign sign, double x) const {
    if (!(x > 0.0)) throw DomainError("Psi: x must be positive");
    const double lx = std::log(x);
    const long n = std::lround(radius_ / step0_);
    // sums[L] = sum over the nodes first appearing at level L
    std::vector<cplx> sums;
    const auto level_sum = [&](std::size_t L) {
        ensure_level(L);
        const auto& base = levels_[L].base;
        cplx acc = 0.0;
        const double h = node_step(L);
        const long first = L == 0 ? -n : -(n << L) + 1;
        const long stride = L == 0 ? 1 : 2;
        for (std::size_t i = 0; i < base.size(); ++i) {
            const double t = (first + static_cast<long>(i) * stride) * h;
            const cplx s(c_, t);
            acc += base[i] * trig_factor(sign, s) * std::exp(s * lx);
        }
        return acc;
    };
    cplx total = level_sum(0);
    cplx prev = total * step0_;
    const double scale = std::exp(c_ * lx) * abs_integral(sign);
    for (std::size_t L = 1; L <= 8; ++L) {
        total += level_sum(L);
        const cplx cur = total * node_step(L);
        const double delta = std::abs(cur - prev);
        prev = cur;
        if (L >= 2 && delta < 1e-13 * std::max(scale, 1e-300)) return {kI * cur, delta};
    }
    const double delta = std::abs(prev - total * node_step(8));
    throw AccuracyError("Psi: trapezoid on the line did not converge", delta);
}

double PsiLine::abs_integral(Sign sign) const {
    ensure_level(1);
    const long n = std::lround(radius_ / step0_);
    double acc = 0.0;
    for (std::size_t L = 0; L <= 1; ++L) {
        const auto& base = levels_[L].base;
        const double h = node_step(L);
        const long first = L == 0 ? -n : -(n << L) + 1;
        const long stride = L == 0 ? 1 : 2;
        for (std::size_t i = 0; i < base.size(); ++i) {
            const double t = (first + static_cast<long>(i) * stride) * h;
            acc += std::abs(base[i] * trig_factor(sign, cplx(c_, t)));
        }
    }
    return acc * node_step(1);
}

cplx psi(Sign sign, double x, const trace::TestFunction& g, double c) {
    const PsiLine line(g, c);
    return line(sign, x).value;
}

double PsiTailBound::operator()(Sign sign, double x) const {
    double v = (sign == Sign::plus ? B_plus : B_minus) * std::pow(x, c_far);
    for (int k = 1; k <= 5; ++k) v += rho[k - 1] * std::pow(x, -0.5 - k);
    return v;
}

PsiTailBound psi_tail_bound(const trace::TestFunction& g, int threads) {
    PsiTailBound tb;
    const double c = tb.c_far;
    // |hhat| with its quadrature and rounding error folded in
    const auto hhat_abs = [&](cplx s) {
        const auto h = h_hat(s, g);
        return std::abs(h.value) + h.delta + 1e-14 * h.l1;
    };
    const auto integrand = [&](double t, Sign sign) {
        const cplx s(c, t);
        return std::abs(std::exp(2.0 * specfun::log_gamma(0.5 - s)) * trig_factor(sign, s)) * hhat_abs(s);
    };
    // radius: |Gamma(1/2 - s)^2| decays like exp(-pi |t|); find where both sides are negligible
    double peak = 0.0, last = 0.0;
    for (double t = 0.0; t <= kHHatMaxImag; t += 1.0) {
        const double m = std::max(integrand(t, Sign::plus), integrand(-t, Sign::plus));
        peak = std::max(peak, m);
        if (m > 1e-18 * peak) last = t;
        if (t > g.K && t - last >= 10.0) break;
    }
    const double radius = std::min(kHHatMaxImag, last + 2.0);
    const double h = 0.125;
    const long n = static_cast<long>(std::ceil(radius / h));
    std::vector<double> plus(2 * n + 1), minus(2 * n + 1);
    parallel_for(plus.size(), threads, [&](std::size_t i) {
        const double t = (static_cast<long>(i) - n) * h;
        const cplx s(c, t);
        const double common = std::abs(std::exp(2.0 * specfun::log_gamma(0.5 - s))) * hhat_abs(s);
        plus[i] = common * std::abs(trig_factor(Sign::plus, s));
        minus[i] = common * std::abs(trig_factor(Sign::minus, s));
    });
    // trapezoid at h and 2h; the larger one, padded by 5%, bounds the integral
    // of these smooth positive functions
    const auto trap = [&](const std::vector<double>& v, int stride) {
        double acc = 0.0;
        for (std::size_t i = 0; i < v.size(); i += stride) acc += v[i];
        return acc * h * stride;
    };
    tb.B_plus = 1.05 * std::max(trap(plus, 1), trap(plus, 2));
    tb.B_minus = 1.05 * std::max(trap(minus, 1), trap(minus, 2));
    double fact = 1.0;
    for (int k = 1; k <= 5; ++k) {
        fact *= k;
        tb.rho[k - 1] = 2.0 * fact * fact * hhat_abs(cplx(-0.5 - k, 0.0));
    }
    return tb;
}

double divisor_bound_quarter() {
    double c = 1.0;
    for (int p : {2, 3, 5, 7, 11, 13}) {
        double best = 1.0;
        for (int k = 1; k < 64; ++k) best = std::max(best, (k + 1) * std::pow(p, -k / 4.0));
        c *= best;
    }
    return c;
}

// ---------------------------------------------------------------- explicit formula

double Truncations::max_certificate() const {
    return std::max({r2_tail, r3_tail, psi_delta, hhat_delta, r7_delta});
}

double ExplicitTerms::sum() const {
    double s = 0.0;
    for (double v : r) s += v;
    return s;
}

double r1_closed_form(long l, const trace::TestFunction& g) {
    const double sl = std::sqrt(static_cast<double>(l));
    return 4.0 * g.K * g.G / std::pow(kPi, 1.5) * tau_of(l) / sl *
           (kEulerGamma - std::log(2 * kPi * sl) + std::log(g.K));
}

namespace {

// certified bound on sum_{m > M} of the R2 (plus) or R3 (minus) summands
double tail_bound(const PsiTailBound& tb, Sign sign, long l, long M, double C2) {
    const double dl = static_cast<double>(l), dM = static_cast<double>(M);
    const double p = -tb.c_far;
    double v = (sign == Sign::plus ? tb.B_plus : tb.B_minus) * std::pow(dl, p) * std::pow(dM, 1 - p) / (p - 1);
    for (int k = 1; k <= 5; ++k) {
        const double q = 0.5 + k;
        v += tb.rho[k - 1] * std::pow(dl, q) * std::pow(dM, 1 - q) / (q - 1);
    }
    const double pre = sign == Sign::plus ? std::pow(1.0 + dl / dM, 0.25) : 1.0;
    return C2 * pre * v / (kPi * kPi * kPi);
}

}  // namespace

ExplicitTerms explicit_terms(const SpectralValues& v, long l, const trace::TestFunction& g,
                             const ExplicitOptions& opt) {
    g.validate();
    check_psi_abscissa(opt.c);
    if (l < 1) throw DomainError("explicit_terms: l >= 1");
    if (l > v.depth) throw CapacityError("explicit_terms: l beyond coefficient depth");
    if (!(opt.radius_scale >= 1.0)) throw DomainError("explicit_terms: radius_scale >= 1");
    check_complete(v.window, g.support_lo(), g.support_hi(), "explicit_terms");

    ExplicitTerms out;
    out.l = l;
    out.g = g;
    auto& tr = out.truncations;
    const double pi3 = kPi * kPi * kPi;
    const double dl = static_cast<double>(l), sl = std::sqrt(dl);

    for (const auto& f : v.even) {
        const double L = f.central.value, tl = t_of(f, l), w = g(f.kappa);
        out.lhs += f.alpha * tl * L * L * w;
        out.lhs_err += std::abs(tl * w) * (f.alpha_err * L * L + 2 * f.alpha * std::abs(L) * f.central.err_estimate);
    }

    // truncation of R2 / R3 from the certified Psi decay
    const PsiTailBound tb = psi_tail_bound(g, opt.threads);
    const double C = divisor_bound_quarter();
    const auto first_m = [&](Sign sign) {
        long M = 1;
        while (tail_bound(tb, sign, l, M, C * C) >= opt.tail_target) {
            M *= 2;
            if (M > opt.max_terms) {
                throw AccuracyError("explicit_terms: truncation infeasible, the certified R2/R3 tail stays above " +
                                        std::to_string(opt.tail_target),
                                    tail_bound(tb, sign, l, opt.max_terms, C * C));
            }
        }
        long lo = M / 2, hi = M;  // tail(lo) >= target > tail(hi)
        while (hi - lo > 1) {
            const long mid = (lo + hi) / 2;
            (tail_bound(tb, sign, l, mid, C * C) < opt.tail_target ? hi : lo) = mid;
        }
        return static_cast<long>(std::ceil(hi * opt.radius_scale));
    };
    const long M2 = first_m(Sign::plus), M3 = first_m(Sign::minus);
    tr.r2_terms = static_cast<int>(M2);
    tr.r3_terms = static_cast<int>(M3);
    tr.r2_tail = tail_bound(tb, Sign::plus, l, M2, C * C);
    tr.r3_tail = tail_bound(tb, Sign::minus, l, M3, C * C);

    const arith::FactorTable ft(std::max<long>({M2, M3, 1}) + l + 1);
    const PsiLine line(g, opt.c, opt.threads, opt.radius_scale);
    tr.psi_radius = line.radius();

    // R1
    const auto d1 = h_hat(0.5, g, 1), d2 = h_hat(0.5, g, 2);
    tr.hhat_delta = std::abs(2.0 / pi3 * tau_of(l) / sl) *
                    (std::abs(kEulerGamma - std::log(2 * kPi * sl)) * d1.delta + d2.delta / 4);
    const cplx r1 = 2.0 / (pi3 * kI) * (tau_of(l) / sl) *
                    ((kEulerGamma - std::log(2 * kPi * sl)) * d1.value + 0.25 * d2.value);
    out.r[0] = r1.real();

    // R2, R3
    double r2 = 0.0, r3 = 0.0, psi_delta = 0.0;
    for (long m = 1; m <= M2; ++m) {
        const double w = arith::tau(m, ft) * arith::tau(m + l, ft) / std::sqrt(static_cast<double>(m));
        const auto p = line(Sign::plus, m / dl);
        r2 += w * p.value.real();
        psi_delta += w * p.delta / pi3;
    }
    for (long m = 1; m <= M3; ++m) {
        const double w = arith::tau(m, ft) * arith::tau(m + l, ft) / std::sqrt(static_cast<double>(m + l));
        const auto p = line(Sign::minus, 1.0 + m / dl);
        r3 += w * p.value.real();
        psi_delta += w * p.delta / pi3;
    }
    out.r[1] = r2 / pi3;
    out.r[2] = r3 / pi3;

    // R4
    double r4 = 0.0;
    for (long m = 1; m <= l - 1; ++m) {
        const double w = arith::tau(m, ft) * arith::tau(l - m, ft) / std::sqrt(static_cast<double>(m));
        const auto p = line(Sign::minus, m / dl);
        r4 += w * p.value.real();
        psi_delta += w * p.delta / pi3;
    }
    out.r[3] = r4 / pi3;

    // R5
    {
        const auto p = line(Sign::minus, 1.0);
        const double w = tau_of(l) / sl / (2 * pi3);
        out.r[4] = -w * p.value.real();
        psi_delta += w * p.delta;
    }
    tr.psi_delta = psi_delta;

    // R6 = -(12 i / pi^2) sigma_{-1}(l) sqrt(l) h'(-i/2)
    {
        const double sigma_m1 = arith::sigma(cplx(-1.0, 0.0), l, ft).real();
        const cplx r6 = -12.0 * kI / (kPi * kPi) * sigma_m1 * sl * weight_h_prime(cplx(0.0, -0.5), g.K, g.G);
        out.r[5] = r6.real();
    }

    // R7
    {
        specfun::QuadratureSpec q;
        q.radius = g.quad_radius() * opt.radius_scale;
        if (q.radius > 250.0) throw RangeError("explicit_terms: R7 radius beyond the zeta envelope");
        q.step = std::min(0.2, g.G / 8);
        q.target_abs_tol = 1e-13;
        const double logl = std::log(dl);
        const auto f = [&](double r) {
            if (r == 0.0) return 0.0;  // |zeta(1 + 2ir)|^{-2} vanishes to second order
            const double z4 = std::norm(std::norm(specfun::zeta(cplx(0.5, r))));
            const double z1 = std::norm(specfun::zeta(cplx(1.0, 2 * r)));
            const cplx tw = arith::sigma(cplx(0.0, 2 * r), l, ft) * std::exp(cplx(0.0, -r * logl));
            return z4 / z1 * tw.real() * weight_h(r, g.K, g.G);
        };
        const auto res = specfun::integrate_line(f, q);
        out.r[6] = -res.value / kPi;
        tr.r7_delta = res.delta / kPi;
        tr.r7_radius = q.radius;
    }

    out.residual = out.lhs - out.sum();
    out.r1_closed = r1_closed_form(l, g);
    out.r1_closed_rational = out.r1_closed * weight_rational(g.K);
    return out;
}

}  // namespace spectral::moments
