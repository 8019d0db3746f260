#include <doctest.h>

#include <cmath>
#include <sstream>

#include "spectral/errors.hpp"
#include "spectral/spectra.hpp"

using namespace spectral;
using namespace spectral::spectra;

namespace {

constexpr double kZeta2 = 3.14159265358979323846 * 3.14159265358979323846 / 6;

std::string record(double kappa, int parity, const MaassForm& f) {
    std::ostringstream os;
    os.precision(17);
    os << kappa << " " << parity << " " << f.depth();
    for (double v : f.hecke) os << " " << v;
    return os.str();
}

const SpectralDataset& fixture() {
    static const SpectralDataset ds = load_dataset(SPECTRAL_FIXTURE);
    return ds;
}

}  // namespace

TEST_CASE("synth_form") {
    const auto a = synth_form(20.0, 42, 200);
    const auto b = synth_form(20.0, 42, 200);
    const auto c = synth_form(20.0, 43, 200);
    CHECK(a.hecke == b.hecke);
    CHECK(a.hecke != c.hecke);
    CHECK(a.t(1) == 1.0);
    CHECK(hecke_residual(a) < kHeckeToleranceSynthetic);
    for (int p : {2, 3, 5, 7, 11, 101, 199}) CHECK(std::abs(a.t(p)) <= 2.0);
    // t(p^2) = t(p)^2 - 1
    CHECK(std::abs(a.t(9) - (a.t(3) * a.t(3) - 1)) < 1e-14);
    CHECK(std::abs(a.t(6) - a.t(2) * a.t(3)) < 1e-14);
    CHECK_NOTHROW(validate_form(a, kHeckeToleranceSynthetic));
}

TEST_CASE("hecke_residual detects a broken coefficient") {
    auto f = synth_form(20.0, 1, 64);
    CHECK(hecke_residual(f) < 1e-12);
    f.hecke[5] += 1e-3;  // t(6)
    // t(2)t(3) - t(6) is off by exactly 1e-3; products involving t(6) itself can be worse
    CHECK(hecke_residual(f) >= 1e-3 * (1 - 1e-9));
    CHECK(hecke_residual(f) < 1e-1);
}

TEST_CASE("load_dataset round trip and validation errors") {
    const auto f1 = synth_form(10.0, 1, 16), f2 = synth_form(11.0, 2, 16), f3 = synth_form(12.0, 3, 16);
    std::string good = "# three synthetic forms\n!window 0 12.5\n" + record(10.0, 1, f1) + "\n" +
                       record(11.0, -1, f2) + "  # trailing comment\n" + record(12.0, 1, f3) + "\n";
    std::istringstream in(good);
    const auto ds = parse_dataset(in, "mem");
    CHECK(ds.forms.size() == 3);
    CHECK(ds.depth == 16);
    CHECK(ds.window.kappa_max == 12.5);
    CHECK(ds.even_forms().size() == 2);
    CHECK(ds.forms[1].parity == Parity::odd);
    CHECK(ds.forms[2].hecke == f3.hecke);

    std::ostringstream out;
    write_dataset(out, ds);
    std::istringstream again(out.str());
    const auto ds2 = parse_dataset(again, "mem2");
    CHECK(ds2.forms.size() == 3);
    CHECK(ds2.forms[0].hecke == ds.forms[0].hecke);

    SUBCASE("t(1) != 1") {
        auto bad = f2;
        bad.hecke[0] = 0.9;
        std::istringstream s("!window 0 11.5\n" + record(10.0, 1, f1) + "\n" + record(11.0, 1, bad) + "\n");
        try {
            parse_dataset(s, "mem");
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("kappa=11") != std::string::npos);
            CHECK(std::string(e.what()).find("t(1)") != std::string::npos);
        }
    }
    SUBCASE("kappa out of order") {
        std::istringstream s("!window 0 11.5\n" + record(11.0, 1, f1) + "\n" + record(10.0, 1, f2) + "\n");
        CHECK_THROWS_AS(parse_dataset(s, "mem"), ValidationError);
    }
    SUBCASE("inconsistent depth") {
        const auto shallow = synth_form(11.0, 2, 8);
        std::istringstream s("!window 0 11.5\n" + record(10.0, 1, f1) + "\n" + record(11.0, 1, shallow) + "\n");
        CHECK_THROWS_AS(parse_dataset(s, "mem"), ValidationError);
    }
    SUBCASE("malformed record") {
        std::istringstream s("!window 0 10.5\n10.0 1 16 1 0.5\n");
        CHECK_THROWS_AS(parse_dataset(s, "mem"), ValidationError);
    }
    SUBCASE("missing window") {
        std::istringstream s(record(10.0, 1, f1) + "\n");
        CHECK_THROWS_AS(parse_dataset(s, "mem"), ValidationError);
    }
    SUBCASE("non-Hecke data") {
        auto bad = f1;
        bad.hecke[5] += 0.01;
        std::istringstream s("!window 0 10.5\n" + record(10.0, 1, bad) + "\n");
        CHECK_THROWS_AS(parse_dataset(s, "mem"), ValidationError);
    }
    SUBCASE("alpha field cross-check") {
        auto r = record(10.0, 1, f1) + " alpha=1.25";
        std::istringstream s("!window 0 10.5\n" + r + "\n");
        const auto d = parse_dataset(s, "mem");
        REQUIRE(d.forms[0].alpha.has_value());
        CHECK(*d.forms[0].alpha == 1.25);
    }
    CHECK_THROWS_AS(load_dataset("/nonexistent/file.dat"), ValidationError);
}

TEST_CASE("omega_partial") {
    auto f = synth_form(20.0, 7, 100);
    CHECK(omega_partial(f, 1.5) == 1.0);
    CHECK(omega_partial(f, 2.5) == doctest::Approx(1.0 + f.t(4) / 2));
    // range split
    CHECK(omega_partial(f, 9.0) - omega_partial(f, 3.0) ==
          doctest::Approx(f.t(16) / 4 + f.t(25) / 5 + f.t(36) / 6 + f.t(49) / 7 + f.t(64) / 8 + f.t(81) / 9));
    CHECK_THROWS_AS(omega_partial(f, 11.0), CapacityError);
}

TEST_CASE("HeckeExtension reproduces stored values and multiplicativity") {
    const auto big = synth_form(20.0, 11, 4000);
    MaassForm small = big;
    small.hecke.resize(100);
    const HeckeExtension ext(small);
    for (long n : {1L, 50L, 99L, 100L, 128L, 625L, 900L, 3600L, 3481L, 97L * 31}) {
        CHECK(std::abs(ext(n) - big.t(n)) < 1e-12);
    }
    CHECK_THROWS_AS(ext(103 * 2), CapacityError);  // 103 > depth
}

TEST_CASE("harmonic_weight: truncated mode reproduces the one-term series") {
    MaassForm f;
    f.kappa = 20.0;
    f.hecke.assign(64, 0.0);
    f.hecke[0] = 1.0;
    SymSquareConfig cfg;
    cfg.method = SymSquareMethod::truncated;
    const auto w = harmonic_weight(f, cfg);
    CHECK(w.alpha == doctest::Approx(2.0 / kZeta2).epsilon(1e-14));
    CHECK(std::abs(w.alpha - 1.2158542037080532) < 1e-12);
    CHECK(w.y == 8.0);
    CHECK(w.x == doctest::Approx(std::pow(20.0, 0.25)));
    CHECK(w.omega_x + w.omega_xy == 1.0);
    CHECK(w.tail_error_estimate == doctest::Approx(std::pow(8.0, -2.0 / 7 + 6 * (7.0 / 64) / 7)));
    MaassForm shallow = f;
    shallow.hecke.resize(8);
    CHECK_THROWS_AS(harmonic_weight(shallow, cfg), CapacityError);
}

TEST_CASE("harmonic_weight: corrupt data gives a non-positive L(1, sym^2)") {
    MaassForm f;
    f.kappa = 20.0;
    f.hecke.assign(16, 0.0);
    f.hecke[0] = 1.0;
    f.hecke[3] = -4.0;  // t(4) = -4 -> 1 - 2 < 0
    SymSquareConfig cfg;
    cfg.method = SymSquareMethod::truncated;
    CHECK_THROWS_AS(harmonic_weight(f, cfg), ValidationError);
}

TEST_CASE("fixture: every form passes validation; harmonic weights are stable") {
    const auto& ds = fixture();
    REQUIRE(ds.forms.size() > 40);
    for (const auto& f : ds.forms) {
        CHECK(hecke_residual(f) < kHeckeToleranceData);
    }
    for (const auto* f : ds.even_forms()) {
        const auto w = harmonic_weight(*f);
        CHECK(w.alpha > 0.1);
        CHECK(w.alpha < 10.0);
        CHECK(w.l_sym2 > 0.0);
        CHECK(w.l_sym2_err < 1e-10);
        // the smoothed value does not depend on the kernel
        SymSquareConfig other;
        other.kernel_b = 0.03;
        CHECK(std::abs(harmonic_weight(*f, other).l_sym2 - w.l_sym2) < 1e-11);
        // the generator's Petersson-norm alpha is an independent oracle
        REQUIRE(f->alpha.has_value());
        CHECK(std::abs(*f->alpha - w.alpha) < 1e-8 * w.alpha);
        // the truncated Dirichlet series is within its (generous) error shape
        CHECK(std::abs(w.l_sym2_truncated - w.l_sym2) < 2 * w.tail_error_estimate);
    }
}

TEST_CASE("weyl_count") {
    const auto& ds = fixture();
    CHECK(weyl_count(ds, 5.0).count == 0);
    int prev = 0;
    for (double T = 5.0; T <= ds.window.kappa_max; T += 0.5) {
        const auto wc = weyl_count(ds, T);
        CHECK(wc.count >= prev);
        CHECK(wc.prediction == doctest::Approx(T * T / 24));
        prev = wc.count;
    }
    CHECK(weyl_count(ds, 13.78).count == 1);

    // The bare T^2/24 is far off at this height (ratio 0.40 at T = 41.5); the full
    // count with its lower-order terms, over both parities, is what the fixture matches.
    const auto full_weyl = [](double T) {
        return T * T / 12 - 2 * T / specfun::kPi * std::log(T / (std::exp(1.0) * std::sqrt(specfun::kPi / 2))) -
               131.0 / 144;
    };
    for (double T = 20.0; T <= ds.window.kappa_max; T += 0.1) {
        int all = 0;
        for (const auto& f : ds.forms) all += f.kappa <= T;
        CHECK(std::abs(all - full_weyl(T)) < 2.5);
    }
    CHECK_THROWS_AS(weyl_count(ds, ds.window.kappa_max + 1), RangeError);
}
