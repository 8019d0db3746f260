#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spectral/specfun.hpp"

namespace spectral::spectra {

enum class Parity : int { even = 1, odd = -1 };

struct MaassForm {
    double kappa = 0.0;
    Parity parity = Parity::even;
    std::vector<double> hecke;  // hecke[n - 1] = t(n)
    std::optional<double> alpha;
    std::string source;

    int depth() const { return static_cast<int>(hecke.size()); }
    double t(std::int64_t n) const { return hecke.at(static_cast<std::size_t>(n - 1)); }
    bool even() const { return parity == Parity::even; }
};

struct Window {
    double kappa_min = 0.0;
    double kappa_max = 0.0;
    bool contains(double k) const { return k >= kappa_min && k <= kappa_max; }
};

struct SpectralDataset {
    std::vector<MaassForm> forms;  // sorted by kappa
    Window window;
    int depth = 0;
    std::string provenance;

    std::vector<const MaassForm*> even_forms() const;
    // Throws CapacityError unless [lo, hi] lies inside the declared window.
    void require_complete(double lo, double hi, const std::string& who) const;
};

// Validation thresholds from the data model.
inline constexpr double kHeckeToleranceData = 1e-6;
inline constexpr double kHeckeToleranceSynthetic = 1e-12;
inline constexpr double kKimSarnakTheta = 7.0 / 64.0;

// max over mn <= N of |t(m)t(n) - sum_{d | (m,n)} t(mn/d^2)|
double hecke_residual(const MaassForm& form);

// Checks t(1) = 1, the Hecke residual and the soft size bound; throws
// ValidationError naming the form.
void validate_form(const MaassForm& form, double hecke_tolerance = kHeckeToleranceData);

SpectralDataset parse_dataset(std::istream& in, const std::string& provenance);
SpectralDataset load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const SpectralDataset& ds);

// omega(x) = sum_{n <= x} t(n^2) / n
double omega_partial(const MaassForm& form, double x);

// t(n) for n beyond the stored depth, rebuilt from t(p) by Hecke multiplicativity.
// Capacity error if a prime factor of n exceeds the depth.
class HeckeExtension {
public:
    explicit HeckeExtension(const MaassForm& form);
    double operator()(std::int64_t n) const;

private:
    double prime_power(std::int64_t p, int e) const;
    const MaassForm* form_;
};

enum class SymSquareMethod {
    smoothed,   // approximate functional equation of L(s, sym^2) at s = 1
    truncated,  // zeta(2) * sum_{n <= sqrt(N)} t(n^2)/n
};

struct SymSquareConfig {
    SymSquareMethod method = SymSquareMethod::smoothed;
    double kernel_b = 0.01;   // G(w) = exp(b w^2)
    double abscissa_near = 0.5;  // contour for the Lambda(1 + w) piece
    double abscissa_far = 1.5;   // contour for the Lambda(w) piece, inside absolute convergence
    double target_abs_tol = 1e-13;
};

struct SymSquareApprox {
    double x = 0.0;
    double y = 0.0;
    double omega_x = 0.0;
    double omega_xy = 0.0;
    double l_sym2_truncated = 0.0;
    double tail_error_estimate = 0.0;  // shape y^{-2/7 + 6 theta / 7}
    double l_sym2 = 0.0;  // value behind alpha (method dependent)
    double l_sym2_err = 0.0;
    double alpha = 0.0;
    int terms_used = 0;
    SymSquareMethod method = SymSquareMethod::smoothed;
};

SymSquareApprox harmonic_weight(const MaassForm& form, const SymSquareConfig& cfg = {});

// gamma(s) = pi^{-3s/2} Gamma(s/2) Gamma((s + 2 i kappa)/2) Gamma((s - 2 i kappa)/2), as a log
specfun::cplx log_gamma_sym2(specfun::cplx s, double kappa);

struct WeylCount {
    int count = 0;
    double prediction = 0.0;  // T^2 / 24
};
WeylCount weyl_count(const SpectralDataset& ds, double T);

MaassForm synth_form(double kappa, std::uint64_t seed, int N);

}  // namespace spectral::spectra
