#include <doctest.h>

#include <cmath>
#include <random>

#include "spectral/errors.hpp"
#include "spectral/mollify.hpp"

using namespace spectral;
using namespace spectral::mollify;
using moments::WeightSpec;
using specfun::kPi;

namespace {

const spectra::SpectralDataset& fixture() {
    static const spectra::SpectralDataset ds = spectra::load_dataset(SPECTRAL_FIXTURE);
    return ds;
}

const moments::SpectralValues& values() {
    static const auto v = moments::evaluate_even_forms(fixture(), {}, 4);
    return v;
}

}  // namespace

TEST_CASE("build: support and shape") {
    const auto tiny = build(20, 1e-6);
    CHECK(tiny.M == 1);
    CHECK(tiny.coeff(1) == 1.0);
    CHECK(tiny.coeff(2) == 0.0);

    const auto mol = build(1000, 0.5);  // M = 31
    CHECK(mol.M == 31);
    CHECK(mol.coeff(1) == 1.0);
    CHECK(mol.coeff(4) == 0.0);
    CHECK(mol.coeff(12) == 0.0);
    CHECK(mol.coeff(32) == 0.0);
    const double u2 = std::log(31.0 / 2) / std::log(31.0);
    CHECK(mol.coeff(2) == doctest::Approx(-u2));
    CHECK(mol.coeff(6) == doctest::Approx(std::log(31.0 / 6) / std::log(31.0)));
    for (long m = 1; m <= mol.M; ++m) CHECK(std::abs(mol.coeff(m)) <= 1.0);

    const auto quad = build(1000, 0.5, [](double u) { return u * u; });
    CHECK(quad.coeff(2) == doctest::Approx(-u2 * u2));
    CHECK(quad.coeff(1) == 1.0);

    CHECK(build(16, 0.5).M == 4);  // exact power
    CHECK_THROWS_AS(build(20, 0.0), DomainError);
    CHECK_THROWS_AS(build(20, 1.0), DomainError);
}

TEST_CASE("mollifier_value") {
    const auto& f = *fixture().even_forms().front();
    CHECK(mollifier_value(f, build(20, 1e-6)) == 1.0);

    spectra::MaassForm flat;
    flat.kappa = 10;
    flat.hecke.assign(50, 0.0);
    flat.hecke[0] = 1.0;
    CHECK(mollifier_value(flat, build(1000, 0.5)) == 1.0);

    const auto mol = build(20, 0.3);
    double direct = 0.0;
    for (long m = 1; m <= mol.M; ++m) direct += mol.coeff(m) * f.t(m) / std::sqrt(static_cast<double>(m));
    CHECK(mollifier_value(f, mol) == doctest::Approx(direct).epsilon(1e-15));
    CHECK(std::isfinite(mollifier_value(f, build(1e6, 0.49))));

    flat.hecke.resize(10);
    CHECK_THROWS_AS(mollifier_value(flat, build(1000, 0.5)), CapacityError);
}

TEST_CASE("mollified moments on the fixture") {
    const WeightSpec w{18, 6, 2};
    const auto& v = values();
    const auto trivial = build(18, 1e-6);
    double direct = 0.0;
    for (const auto& f : v.even) direct += moments::weight_omega(f.kappa, w) * f.central.value;
    CHECK(std::abs(mollified_moment(v, trivial, w, 1) - direct) < 1e-12 * direct);

    // harmonic weighting of the trivial mollifier is the Omega-smoothed first moment
    CHECK(mollified_moment(v, trivial, w, 1, Weighting::harmonic) ==
          doctest::Approx(moments::moment_spectral(v, 1, w, 1)).epsilon(1e-14));

    moments::SpectralValues empty;
    empty.window = {0, 50};
    CHECK(mollified_moment(empty, build(18, 0.3), w, 2) == 0.0);

    const auto mol = build(18, 0.3);
    CHECK(mollified_moment(fixture(), mol, w, 2, {}, 2) ==
          doctest::Approx(mollified_moment(v, mol, w, 2)).epsilon(1e-14));
    CHECK_THROWS_AS(mollified_moment(v, mol, WeightSpec{40, 6, 2}, 1), CapacityError);
    CHECK_THROWS_AS(mollified_moment(v, mol, w, 3), DomainError);
}

TEST_CASE("predicted moments and the proportion algebra") {
    CHECK(predicted_moment(10, 5, 0.5, 1) == doctest::Approx(125 * kPi * kPi / 72).epsilon(1e-14));
    CHECK(predicted_moment(10, 5, 0.5, 1) == doctest::Approx(17.135).epsilon(1e-4));
    CHECK(predicted_moment(10, 5, 1e-9, 2) > 1e8 * predicted_moment(10, 5, 0.5, 2) / 3);
    CHECK(nonvanishing_bound(1, 2, 5, 2) == doctest::Approx(0.5));  // 2TH + H^2 = 24
    CHECK_THROWS_AS(nonvanishing_bound(1, 0, 5, 2), DomainError);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pt(1, 1e4), ph(0.01, 1), pd(1e-3, 0.999);
    for (int i = 0; i < 50; ++i) {
        const double T = pt(rng), H = T * ph(rng), D = pd(rng);
        const double b = nonvanishing_bound(predicted_moment(T, H, D, 1), predicted_moment(T, H, D, 2), T, H);
        CHECK(std::abs(b - D / (1 + D)) < 1e-12);
    }
}

TEST_CASE("admissible delta") {
    const auto a1 = admissible_delta(1.0);
    CHECK(a1.alpha == 0.0);
    CHECK(a1.delta == 1.0);
    CHECK(a1.proportion == 0.5);
    const auto a7 = admissible_delta(0.7);
    CHECK(a7.alpha == 0.0);
    CHECK(a7.delta == doctest::Approx(0.775));
    CHECK(a7.proportion == doctest::Approx(0.43662).epsilon(1e-5));
    const auto a25 = admissible_delta(0.25);
    CHECK(a25.alpha == doctest::Approx(13.0 / 21));
    CHECK(a25.delta == doctest::Approx(8.0 / 21));
    CHECK(a25.proportion == doctest::Approx(8.0 / 29));
    CHECK(admissible_delta(2.0 / 3.0).on_boundary);
    CHECK(!admissible_delta(0.7).on_boundary);

    double prev = 0.0;
    for (int i = 1; i <= 1000; ++i) {
        const auto a = admissible_delta(i / 1000.0);
        CHECK(a.delta >= prev);
        CHECK(a.proportion > 0.0);
        CHECK(a.proportion <= 0.5);
        prev = a.delta;
    }
    CHECK_THROWS_AS(admissible_delta(0.0), DomainError);
    CHECK_THROWS_AS(admissible_delta(1.1), DomainError);
}

TEST_CASE("empirical count") {
    moments::SpectralValues empty;
    empty.window = {0, 30};
    const auto e = empirical_count(empty, 25);
    CHECK(e.total == 0);
    CHECK(!e.proportion.has_value());
    CHECK(e.policy_note.find("10") != std::string::npos);

    const auto c = empirical_count(values(), 25);
    CHECK(c.total > 0);
    REQUIRE(c.proportion.has_value());
    CHECK(*c.proportion >= 0.0);
    CHECK(*c.proportion <= 1.0);
    CHECK(*c.proportion >= 0.5);
    int even_le = 0;
    for (const auto* f : fixture().even_forms()) even_le += f->kappa <= 25;
    CHECK(c.total == even_le);

    // a stricter policy can only lower the count
    const auto strict = empirical_count(values(), 25, lvalues::ThresholdPolicy{1e12});
    CHECK(strict.nonzero <= c.nonzero);
    CHECK_THROWS_AS(empirical_count(values(), 60), CapacityError);
    CHECK(empirical_count(fixture(), 25).nonzero == c.nonzero);
}

TEST_CASE("proportion report") {
    const WeightSpec w{18, 6, 2};
    const auto mol = build(18, 0.3);
    const auto r = proportion_report(values(), mol, w, empirical_count(values(), 25));
    CHECK(r.bound == doctest::Approx(nonvanishing_bound(r.m1, r.m2, 18, 6)));
    CHECK(r.theoretical == doctest::Approx(0.3 / 1.3));
    CHECK(r.ratio1 == doctest::Approx(r.m1 / r.predicted1));
    CHECK(r.m2 > 0.0);
    CHECK(r.m1_harmonic > 0.0);
    CHECK(r.empirical.has_value());
    CHECK(r.M == mol.M);
}
