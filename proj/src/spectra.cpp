#include "spectral/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "spectral/errors.hpp"

namespace spectral::spectra {

using specfun::cplx;
using specfun::kPi;

namespace {

int divisor_count(std::int64_t n) {
    int count = 1;
    for (std::int64_t p = 2; p * p <= n; ++p) {
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        count *= e + 1;
    }
    if (n > 1) count *= 2;
    return count;
}

std::string describe(const MaassForm& f) {
    std::ostringstream os;
    os << std::setprecision(12) << "form kappa=" << f.kappa
       << (f.even() ? " (even)" : " (odd)");
    if (!f.source.empty()) os << " [" << f.source << "]";
    return os.str();
}

}  // namespace

std::vector<const MaassForm*> SpectralDataset::even_forms() const {
    std::vector<const MaassForm*> out;
    for (const auto& f : forms) {
        if (f.even()) out.push_back(&f);
    }
    return out;
}

void SpectralDataset::require_complete(double lo, double hi, const std::string& who) const {
    if (lo < window.kappa_min || hi > window.kappa_max) {
        std::ostringstream os;
        os << who << ": needs spectrum complete on [" << lo << ", " << hi
           << "] but the dataset window is [" << window.kappa_min << ", " << window.kappa_max << "]";
        throw CapacityError(os.str());
    }
}

double hecke_residual(const MaassForm& form) {
    const std::int64_t N = form.depth();
    double worst = 0.0;
    for (std::int64_t m = 1; m * m <= N; ++m) {
        for (std::int64_t n = m; m * n <= N; ++n) {
            const std::int64_t g = std::gcd(m, n);
            double rhs = 0.0;
            for (std::int64_t d = 1; d <= g; ++d) {
                if (g % d == 0) rhs += form.t(m * n / (d * d));
            }
            worst = std::max(worst, std::abs(form.t(m) * form.t(n) - rhs));
        }
    }
    return worst;
}

void validate_form(const MaassForm& form, double hecke_tolerance) {
    const auto fail = [&](const std::string& why) {
        throw ValidationError(describe(form) + ": " + why);
    };
    if (!(form.kappa > 0.0) || !std::isfinite(form.kappa)) fail("kappa must be positive");
    if (form.hecke.empty()) fail("no coefficients");
    if (form.hecke[0] != 1.0) {
        std::ostringstream os;
        os << "t(1) = " << form.hecke[0] << ", expected 1";
        fail(os.str());
    }
    for (std::int64_t n = 1; n <= form.depth(); ++n) {
        const double v = form.t(n);
        if (!std::isfinite(v)) fail("non-finite coefficient at n=" + std::to_string(n));
        const double bound = divisor_count(n) * std::pow(static_cast<double>(n), kKimSarnakTheta + 0.05);
        if (std::abs(v) > bound) {
            std::ostringstream os;
            os << "|t(" << n << ")| = " << std::abs(v) << " exceeds the size bound " << bound;
            fail(os.str());
        }
    }
    if (form.depth() >= 4) {
        const double res = hecke_residual(form);
        if (!(res < hecke_tolerance)) {
            std::ostringstream os;
            os << "Hecke residual " << res << " above " << hecke_tolerance;
            fail(os.str());
        }
    }
}

SpectralDataset parse_dataset(std::istream& in, const std::string& provenance) {
    SpectralDataset ds;
    ds.provenance = provenance;
    bool have_window = false;
    std::string line;
    int lineno = 0;
    double last_kappa[2] = {-1.0, -1.0};
    double last_any = -1.0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto where = provenance + ":" + std::to_string(lineno);
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string head;
        if (!(fields >> head)) continue;
        if (head == "!window") {
            double lo, hi;
            if (!(fields >> lo >> hi) || !(lo >= 0.0) || !(hi > lo)) {
                throw ValidationError(where + ": malformed !window line");
            }
            ds.window = {lo, hi};
            have_window = true;
            continue;
        }
        if (head[0] == '!') {
            throw ValidationError(where + ": unknown directive " + head);
        }
        MaassForm f;
        int parity = 0, count = 0;
        try {
            std::size_t used = 0;
            f.kappa = std::stod(head, &used);
            if (used != head.size()) throw std::invalid_argument(head);
        } catch (const std::exception&) {
            throw ValidationError(where + ": malformed kappa '" + head + "'");
        }
        if (!(fields >> parity >> count) || (parity != 1 && parity != -1) || count < 1) {
            throw ValidationError(where + ": expected 'kappa parity n_coeffs t1 ... tN'");
        }
        f.parity = parity == 1 ? Parity::even : Parity::odd;
        f.hecke.resize(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            if (!(fields >> f.hecke[i])) {
                throw ValidationError(where + ": expected " + std::to_string(count) +
                                      " coefficients, got " + std::to_string(i));
            }
        }
        std::string extra;
        while (fields >> extra) {
            if (extra.rfind("alpha=", 0) == 0) {
                try {
                    f.alpha = std::stod(extra.substr(6));
                } catch (const std::exception&) {
                    throw ValidationError(where + ": malformed " + extra);
                }
            } else {
                throw ValidationError(where + ": trailing field '" + extra + "'");
            }
        }
        f.source = where;
        if (ds.depth == 0) {
            ds.depth = count;
        } else if (count != ds.depth) {
            throw ValidationError(where + ": depth " + std::to_string(count) +
                                  " differs from dataset depth " + std::to_string(ds.depth));
        }
        const int slot = f.even() ? 0 : 1;
        if (f.kappa <= last_kappa[slot] || f.kappa < last_any) {
            throw ValidationError(where + ": " + describe(f) + " is out of kappa order");
        }
        last_kappa[slot] = f.kappa;
        last_any = f.kappa;
        validate_form(f);
        ds.forms.push_back(std::move(f));
    }
    if (!have_window) {
        throw ValidationError(provenance + ": missing !window line");
    }
    if (!ds.forms.empty() && ds.window.kappa_max > ds.forms.back().kappa + 1.0) {
        throw ValidationError(provenance + ": window extends beyond the covered kappa range");
    }
    return ds;
}

SpectralDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open dataset " + path.string());
    }
    return parse_dataset(in, path.filename().string());
}

void write_dataset(std::ostream& out, const SpectralDataset& ds) {
    out << "# " << ds.provenance << "\n";
    out << std::setprecision(17);
    out << "!window " << ds.window.kappa_min << " " << ds.window.kappa_max << "\n";
    for (const auto& f : ds.forms) {
        out << f.kappa << " " << static_cast<int>(f.parity) << " " << f.depth();
        for (double v : f.hecke) out << " " << v;
        if (f.alpha) out << " alpha=" << *f.alpha;
        out << "\n";
    }
}

double omega_partial(const MaassForm& form, double x) {
    if (!(x >= 1.0)) {
        throw DomainError("omega_partial: x must be >= 1");
    }
    const auto top = static_cast<std::int64_t>(std::floor(x));
    if (top * top > form.depth()) {
        throw CapacityError("omega_partial: x = " + std::to_string(x) + " needs depth N >= " +
                            std::to_string(top * top) + ", have " + std::to_string(form.depth()));
    }
    double sum = 0.0;
    for (std::int64_t n = 1; n <= top; ++n) sum += form.t(n * n) / static_cast<double>(n);
    return sum;
}

HeckeExtension::HeckeExtension(const MaassForm& form) : form_(&form) {}

double HeckeExtension::prime_power(std::int64_t p, int e) const {
    const std::int64_t N = form_->depth();
    if (p > N) {
        throw CapacityError("Hecke extension needs t(" + std::to_string(p) + ") beyond depth " +
                            std::to_string(N));
    }
    // t(p^{k+1}) = t(p) t(p^k) - t(p^{k-1}); stored values are used while p^k <= N
    double prev = 1.0, cur = form_->t(p);
    std::int64_t pk = p;
    for (int k = 1; k < e; ++k) {
        const bool stored = pk <= N / p;
        pk = stored ? pk * p : N + 1;
        const double next = stored ? form_->t(pk) : form_->t(p) * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double HeckeExtension::operator()(std::int64_t n) const {
    if (n < 1) throw DomainError("Hecke extension: n must be positive");
    if (n <= form_->depth()) return form_->t(n);
    double value = 1.0;
    for (std::int64_t p = 2; p * p <= n; ++p) {
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e > 0) value *= prime_power(p, e);
    }
    if (n > 1) value *= prime_power(n, 1);
    return value;
}

cplx log_gamma_sym2(cplx s, double kappa) {
    using specfun::log_gamma;
    const cplx ik(0.0, kappa);
    return -1.5 * s * std::log(kPi) + log_gamma(s / 2.0) + log_gamma((s + 2.0 * ik) / 2.0) +
           log_gamma((s - 2.0 * ik) / 2.0);
}

namespace {

// Half-length beyond which |gamma(c + iy) / gamma(1)| |G| / |w| stays below `floor`.
double envelope_radius(double c, double shift, double kappa, double b, double log_floor) {
    const cplx lg1 = log_gamma_sym2(1.0, kappa);
    double last = 0.0;
    for (double y = 0.0; y <= 2000.0; y += 1.0) {
        const cplx w(c, y);
        const double mag = (log_gamma_sym2(shift + w, kappa) - lg1).real() + b * (c * c - y * y) -
                           std::log(std::abs(w));
        if (mag > log_floor) last = y;
        if (y > 4 * kappa + 4 * c + 50 && y - last > 50) break;
    }
    return last + 1.0;
}

// sup-type bound B(c) = (1/2pi) int |gamma(shift + c + iy)/gamma(1)| |G(c + iy)| / |c + iy| dy
double weight_bound(double c, double shift, double kappa, double b) {
    const cplx lg1 = log_gamma_sym2(1.0, kappa);
    specfun::QuadratureSpec q;
    q.radius = envelope_radius(c, shift, kappa, b, -60.0 + b * c * c);
    q.step = 0.5;
    q.target_abs_tol = 1e-6;
    const auto f = [&](double y) {
        const cplx w(c, y);
        return std::exp((log_gamma_sym2(shift + w, kappa) - lg1).real() + b * (c * c - y * y)) /
               std::abs(w);
    };
    // crude but safe: a relative tolerance is enough for a bound
    q.target_abs_tol = 1e-3 * std::max(1e-300, std::abs(f(0.0)));
    return integrate_line(f, q).value / (2 * kPi) * 1.01;
}

}  // namespace

SymSquareApprox harmonic_weight(const MaassForm& form, const SymSquareConfig& cfg) {
    const int N = form.depth();
    if (N < 16) {
        throw CapacityError("harmonic_weight: depth N >= 16 required");
    }
    SymSquareApprox out;
    out.method = cfg.method;
    out.y = std::sqrt(static_cast<double>(N));
    out.x = std::min(out.y, std::pow(form.kappa, 0.25));
    out.omega_x = omega_partial(form, out.x);
    out.omega_xy = omega_partial(form, out.y) - out.omega_x;
    const double zeta2 = kPi * kPi / 6.0;
    out.l_sym2_truncated = zeta2 * (out.omega_x + out.omega_xy);
    out.tail_error_estimate = std::pow(out.y, -2.0 / 7.0 + 6.0 * kKimSarnakTheta / 7.0);

    if (cfg.method == SymSquareMethod::truncated) {
        out.l_sym2 = out.l_sym2_truncated;
        out.l_sym2_err = out.tail_error_estimate;
        out.terms_used = static_cast<int>(std::floor(out.y));
    } else {
        const double b = cfg.kernel_b;
        const double c1 = cfg.abscissa_near, c2 = cfg.abscissa_far;
        if (!(b > 0.0) || !(c1 > 0.0) || !(c2 > 1.0)) {
            throw DomainError("harmonic_weight: need kernel_b > 0, abscissa_near > 0, abscissa_far > 1");
        }
        // Length: tail sum_{n > L} |A(n)| |W(n)| with |A(n)| <= n^{1/2} and
        // |W(n)| <= B(c) n^{-c} on a shifted line.
        const double tol = cfg.target_abs_tol;
        int length = 0;
        double tail = 0.0;
        std::vector<std::pair<double, double>> bounds;  // (c, B(c))
        for (double c = 2.0; c <= 60.0; c += 2.0) {
            bounds.emplace_back(c, weight_bound(c, 0.0, form.kappa, b) + weight_bound(c, 1.0, form.kappa, b));
        }
        for (int L = 4; L <= 1 << 20; L = L * 5 / 4 + 1) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& [c, bound] : bounds) {
                best = std::min(best, bound * std::pow(L, 1.5 - c) / (c - 1.5));
            }
            if (best < 0.1 * tol) {
                length = L;
                tail = best;
                break;
            }
        }
        if (length == 0) {
            throw AccuracyError("harmonic_weight: could not bound the sym^2 tail", tail);
        }
        if (length > N) {
            throw CapacityError("harmonic_weight: smoothed sym^2 sum needs t(p) for p <= " +
                                std::to_string(length) + ", depth is " + std::to_string(N));
        }
        // A(n) = sum_{d^2 | n} t((n/d^2)^2)
        const HeckeExtension t(form);
        std::vector<double> coeff(static_cast<std::size_t>(length) + 1, 0.0);
        for (std::int64_t d = 1; d * d <= length; ++d) {
            for (std::int64_t m = 1; m * d * d <= length; ++m) coeff[m * d * d] += t(m * m);
        }
        std::vector<double> logn(coeff.size(), 0.0);
        for (int n = 1; n <= length; ++n) logn[n] = std::log(static_cast<double>(n));

        const cplx lg1 = log_gamma_sym2(1.0, form.kappa);
        const auto dirichlet = [&](cplx s) {
            cplx sum = 0.0;
            for (int n = length; n >= 1; --n) sum += coeff[n] * std::exp(-s * logn[n]);
            return sum;
        };
        const auto piece = [&](double c, double shift) {
            specfun::QuadratureSpec q;
            q.radius = envelope_radius(c, shift, form.kappa, b, std::log(1e-18));
            q.step = 0.25;
            // (delta_near + delta_far) / 2pi <= tol / 2; much tighter is below rounding for |I| ~ 10
            q.target_abs_tol = kPi * tol / 2;
            q.max_refinements = 10;
            const auto f = [&](double y) {
                const cplx w(c, y);
                return (std::exp(log_gamma_sym2(shift + w, form.kappa) - lg1 + b * w * w) / w *
                        dirichlet(shift + w)).real();
            };
            return integrate_line(f, q);
        };
        const auto near = piece(c1, 1.0);
        const auto far = piece(c2, 0.0);
        out.l_sym2 = (near.value + far.value) / (2 * kPi);
        out.l_sym2_err = (near.delta + far.delta) / (2 * kPi) + 2 * tail;
        out.terms_used = length;
    }
    if (!(out.l_sym2 > 0.0)) {
        throw ValidationError(describe(form) + ": L(1, sym^2) = " + std::to_string(out.l_sym2) +
                              " is not positive; coefficients look corrupt");
    }
    out.alpha = 2.0 / out.l_sym2;
    if (form.alpha) {
        const double rel = std::abs(*form.alpha - out.alpha) / out.alpha;
        if (rel > 1e-3 && cfg.method == SymSquareMethod::smoothed) {
            std::ostringstream os;
            os << describe(form) << ": file alpha " << *form.alpha << " disagrees with recomputed "
               << out.alpha << " (relative " << rel << ")";
            throw ValidationError(os.str());
        }
    }
    return out;
}

WeylCount weyl_count(const SpectralDataset& ds, double T) {
    if (T > ds.window.kappa_max) {
        throw RangeError("weyl_count: T beyond the dataset window");
    }
    WeylCount wc;
    for (const auto& f : ds.forms) {
        if (f.even() && f.kappa <= T) ++wc.count;
    }
    wc.prediction = T * T / 24.0;
    return wc;
}

MaassForm synth_form(double kappa, std::uint64_t seed, int N) {
    if (N < 1) throw DomainError("synth_form: N >= 1 required");
    MaassForm f;
    f.kappa = kappa;
    f.parity = Parity::even;
    f.source = "synthetic seed=" + std::to_string(seed);
    f.hecke.assign(static_cast<std::size_t>(N), 0.0);
    // splitmix64 keeps the stream identical across standard libraries
    std::uint64_t state = seed;
    const auto next_unit = [&state]() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    };
    std::vector<int> spf(static_cast<std::size_t>(N) + 1, 0);
    for (int i = 2; i <= N; ++i) {
        if (spf[i] != 0) continue;
        for (long j = i; j <= N; j += i) {
            if (spf[j] == 0) spf[j] = i;
        }
        // prime i: t(p) = 2 cos theta, then the prime-power recursion
        const double tp = 2.0 * std::cos(kPi * next_unit());
        double prev = 1.0, cur = tp;
        for (long pk = i; pk <= N; pk *= i) {
            f.hecke[pk - 1] = cur;
            const double nxt = tp * cur - prev;
            prev = cur;
            cur = nxt;
            if (pk > N / i) break;
        }
    }
    f.hecke[0] = 1.0;
    for (int n = 2; n <= N; ++n) {
        const int p = spf[n];
        long pk = p;
        int m = n / p;
        while (m % p == 0) {
            m /= p;
            pk *= p;
        }
        if (m > 1) f.hecke[n - 1] = f.hecke[pk - 1] * f.hecke[m - 1];
    }
    return f;
}

}  // namespace spectral::spectra
