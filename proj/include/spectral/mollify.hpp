#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spectral/lvalues.hpp"
#include "spectral/moments.hpp"
#include "spectral/spectra.hpp"

namespace spectral::mollify {

// P(u) on [0, 1]; the default is P(u) = u
using Shape = std::function<double(double)>;

struct Mollifier {
    double T = 0.0;
    double Delta = 0.0;
    long M = 1;               // floor(T^Delta)
    std::vector<double> x;    // x[m] for 0 <= m <= M, x[0] unused

    double coeff(long m) const { return m >= 1 && m <= M ? x[static_cast<std::size_t>(m)] : 0.0; }
};

// x_m = mu(m) P(log(M/m) / log M) on squarefree m <= M, x_1 = 1.
Mollifier build(double T, double Delta, const Shape& P = {});

// sum_m x_m t(m) / sqrt m
double mollifier_value(const spectra::MaassForm& form, const Mollifier& mol);

enum class Weighting { natural, harmonic };

// sum_j Omega(kappa_j) (M(j) L_j(1/2))^order over even forms. Natural weighting
// drops alpha_j; harmonic keeps it (both are reported, see ProportionReport).
double mollified_moment(const moments::SpectralValues& v, const Mollifier& mol, const moments::WeightSpec& spec,
                        int order, Weighting weighting = Weighting::natural);
double mollified_moment(const spectra::SpectralDataset& ds, const Mollifier& mol, const moments::WeightSpec& spec,
                        int order, const lvalues::AfeConfig& afe = {}, int threads = 1);

// order 1: (zeta(2)^2 / 2 pi^2)(2TH + H^2); order 2: (zeta(2)^3 / pi^2)(2TH + H^2)(1 + Delta) / Delta
double predicted_moment(double T, double H, double Delta, int order);

// (24 / (2TH + H^2)) m1^2 / m2
double nonvanishing_bound(double m1, double m2, double T, double H);

struct Admissible {
    double alpha = 0.0;
    double delta = 0.0;
    double proportion = 0.0;
    // beta sits on a case boundary that carries "+ eps"; the smaller alpha was taken
    bool on_boundary = false;
};
Admissible admissible_delta(double beta);

struct EmpiricalCount {
    int nonzero = 0;
    int total = 0;
    std::optional<double> proportion;  // empty when total = 0
    double T = 0.0;
    lvalues::ThresholdPolicy policy;
    std::string policy_note;  // the rule behind "nonzero", always reported with the counts
};

// even forms with kappa <= T counted as nonzero by the policy; needs the window to start at 0
EmpiricalCount empirical_count(const moments::SpectralValues& v, double T,
                               const lvalues::ThresholdPolicy& policy = {});
EmpiricalCount empirical_count(const spectra::SpectralDataset& ds, double T,
                               const lvalues::ThresholdPolicy& policy = {}, const lvalues::AfeConfig& afe = {},
                               int threads = 1);

struct ProportionReport {
    double m1 = 0.0;          // natural weighting
    double m2 = 0.0;
    double bound = 0.0;       // nonvanishing_bound(m1, m2)
    double delta_used = 0.0;
    double theoretical = 0.0; // Delta / (1 + Delta)
    std::optional<EmpiricalCount> empirical;
    double predicted1 = 0.0;
    double predicted2 = 0.0;
    double ratio1 = 0.0;      // m1 / predicted1
    double ratio2 = 0.0;
    double m1_harmonic = 0.0;
    double m2_harmonic = 0.0;
    double bound_harmonic = 0.0;
    moments::WeightSpec params;
    long M = 1;
};

ProportionReport proportion_report(const moments::SpectralValues& v, const Mollifier& mol,
                                   const moments::WeightSpec& spec,
                                   std::optional<EmpiricalCount> empirical = std::nullopt);

}  // namespace spectral::mollify
