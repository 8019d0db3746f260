#include "spectral/mollify.hpp"

#include <cmath>
#include <sstream>

#include "spectral/arith.hpp"
#include "spectral/errors.hpp"

namespace spectral::mollify {

using specfun::kPi;

namespace {

constexpr double kZeta2 = kPi * kPi / 6;

void check_delta(double Delta) {
    if (!(Delta > 0.0 && Delta < 1.0)) throw DomainError("mollifier: Delta must lie in (0, 1)");
}

void check_order(int order) {
    if (order != 1 && order != 2) throw DomainError("mollified moment order must be 1 or 2");
}

}  // namespace

Mollifier build(double T, double Delta, const Shape& P) {
    check_delta(Delta);
    if (!(T >= 1.0)) throw DomainError("mollifier: T >= 1 required");
    Mollifier mol;
    mol.T = T;
    mol.Delta = Delta;
    // floor with a nudge so that exact powers (T^Delta = 4.0000000001) do not slip
    mol.M = std::max<long>(1, static_cast<long>(std::floor(std::pow(T, Delta) * (1 + 1e-12))));
    mol.x.assign(static_cast<std::size_t>(mol.M) + 1, 0.0);
    mol.x[1] = 1.0;
    if (mol.M == 1) return mol;
    const arith::FactorTable ft(mol.M);
    const double logM = std::log(static_cast<double>(mol.M));
    for (long m = 2; m <= mol.M; ++m) {
        const int mu = arith::moebius(m, ft);
        if (mu == 0) continue;
        const double u = std::log(static_cast<double>(mol.M) / m) / logM;
        mol.x[static_cast<std::size_t>(m)] = mu * (P ? P(u) : u);
    }
    return mol;
}

double mollifier_value(const spectra::MaassForm& form, const Mollifier& mol) {
    if (mol.M > form.depth()) {
        throw CapacityError("mollifier_value: M = " + std::to_string(mol.M) + " beyond coefficient depth " +
                            std::to_string(form.depth()));
    }
    double s = 0.0;
    for (long m = 1; m <= mol.M; ++m) {
        const double xm = mol.x[static_cast<std::size_t>(m)];
        if (xm != 0.0) s += xm * form.t(m) / std::sqrt(static_cast<double>(m));
    }
    return s;
}

double mollified_moment(const moments::SpectralValues& v, const Mollifier& mol, const moments::WeightSpec& spec,
                        int order, Weighting weighting) {
    check_order(order);
    spec.validate();
    if (spec.complete_lo() < v.window.kappa_min || spec.complete_hi() > v.window.kappa_max) {
        std::ostringstream os;
        os << "mollified_moment: needs spectrum complete on [" << spec.complete_lo() << ", " << spec.complete_hi()
           << "]";
        throw CapacityError(os.str());
    }
    double sum = 0.0;
    for (const auto& f : v.even) {
        const double ml = mollifier_value(*f.form, mol) * f.central.value;
        const double w = moments::weight_omega(f.kappa, spec) * (weighting == Weighting::harmonic ? f.alpha : 1.0);
        sum += w * (order == 1 ? ml : ml * ml);
    }
    return sum;
}

double mollified_moment(const spectra::SpectralDataset& ds, const Mollifier& mol, const moments::WeightSpec& spec,
                        int order, const lvalues::AfeConfig& afe, int threads) {
    check_order(order);
    spec.validate();
    ds.require_complete(spec.complete_lo(), spec.complete_hi(), "mollified_moment");
    return mollified_moment(moments::evaluate_even_forms(ds, afe, threads), mol, spec, order);
}

double predicted_moment(double T, double H, double Delta, int order) {
    check_delta(Delta);
    check_order(order);
    const double span = 2 * T * H + H * H;
    if (order == 1) return kZeta2 * kZeta2 / (2 * kPi * kPi) * span;
    return kZeta2 * kZeta2 * kZeta2 / (kPi * kPi) * span * (1 + Delta) / Delta;
}

double nonvanishing_bound(double m1, double m2, double T, double H) {
    if (!(m2 > 0.0)) throw DomainError("nonvanishing_bound: m2 must be positive");
    return 24.0 / (2 * T * H + H * H) * m1 * m1 / m2;
}

Admissible admissible_delta(double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("admissible_delta: beta must lie in (0, 1]");
    Admissible a;
    a.alpha = moments::alpha_exponent(beta);
    a.on_boundary = beta == 2.0 / 3.0 || beta == 1273.0 / 4053.0;
    a.delta = std::min(1 - a.alpha, 0.25 + 0.75 * beta);
    a.proportion = a.delta / (1 + a.delta);
    return a;
}

EmpiricalCount empirical_count(const moments::SpectralValues& v, double T, const lvalues::ThresholdPolicy& policy) {
    if (!(T > 0.0)) throw DomainError("empirical_count: T must be positive");
    if (v.window.kappa_min > 0.0 || v.window.kappa_max < T) {
        std::ostringstream os;
        os << "empirical_count: needs the spectrum complete on [0, " << T << "], dataset window is ["
           << v.window.kappa_min << ", " << v.window.kappa_max << "]";
        throw CapacityError(os.str());
    }
    EmpiricalCount out;
    out.T = T;
    out.policy = policy;
    for (const auto& f : v.even) {
        if (f.kappa > T) continue;
        ++out.total;
        if (policy.nonzero(f.central)) ++out.nonzero;
    }
    if (out.total > 0) out.proportion = static_cast<double>(out.nonzero) / out.total;
    std::ostringstream note;
    note << "nonzero means L(1/2) > " << policy.factor << " x err_estimate; even forms with kappa <= " << T;
    out.policy_note = note.str();
    return out;
}

EmpiricalCount empirical_count(const spectra::SpectralDataset& ds, double T, const lvalues::ThresholdPolicy& policy,
                               const lvalues::AfeConfig& afe, int threads) {
    ds.require_complete(0.0, T, "empirical_count");
    return empirical_count(moments::evaluate_even_forms(ds, afe, threads), T, policy);
}

ProportionReport proportion_report(const moments::SpectralValues& v, const Mollifier& mol,
                                   const moments::WeightSpec& spec, std::optional<EmpiricalCount> empirical) {
    ProportionReport r;
    r.params = spec;
    r.M = mol.M;
    r.delta_used = mol.Delta;
    r.theoretical = mol.Delta / (1 + mol.Delta);
    r.m1 = mollified_moment(v, mol, spec, 1);
    r.m2 = mollified_moment(v, mol, spec, 2);
    r.bound = nonvanishing_bound(r.m1, r.m2, spec.T, spec.H);
    r.predicted1 = predicted_moment(spec.T, spec.H, mol.Delta, 1);
    r.predicted2 = predicted_moment(spec.T, spec.H, mol.Delta, 2);
    r.ratio1 = r.m1 / r.predicted1;
    r.ratio2 = r.m2 / r.predicted2;
    r.m1_harmonic = mollified_moment(v, mol, spec, 1, Weighting::harmonic);
    r.m2_harmonic = mollified_moment(v, mol, spec, 2, Weighting::harmonic);
    r.bound_harmonic = nonvanishing_bound(r.m1_harmonic, r.m2_harmonic, spec.T, spec.H);
    r.empirical = std::move(empirical);
    return r;
}

}  // namespace spectral::mollify
