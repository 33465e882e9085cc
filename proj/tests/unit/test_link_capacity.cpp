#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "smmlink/config.hpp"
#include "smmlink/errors.hpp"
#include "smmlink/link_capacity.hpp"
#include "smmlink/optimize.hpp"

using namespace smmlink;
using std::numbers::e;
using std::numbers::pi;
using cplx = std::complex<double>;

namespace {

// Thermal noise term 4 k_b T F_n B with the default detector, by hand.
double thermal() { return 4.0 * 1.380649e-23 * 300.0 * std::pow(10.0, 0.5) * 10e9; }

double hand_rate(double snr, double bandwidth) {
    return 0.5 * bandwidth * std::log(1.0 + snr * e / (2 * pi)) / std::log(2.0);
}

ComplexMatrix real2(double a, double b, double c, double d) {
    return ComplexMatrix(2, 2, {{a, 0}, {b, 0}, {c, 0}, {d, 0}});
}

}  // namespace

TEST_CASE("detector and budget conversions") {
    DetectorConfig det;
    CHECK(det.thermal_noise() == doctest::Approx(thermal()));
    CHECK(det.noise_variance() == doctest::Approx(thermal() / 500.0));
    CHECK(PowerBudget::from_dbm(10.0).total == doctest::Approx(0.01));
    CHECK(PowerBudget::from_dbm(-15.0).total == doctest::Approx(std::pow(10.0, -1.5) * 1e-3));
    CHECK(watts_to_dbm(dbm_to_watts(7.3)) == doctest::Approx(7.3));
    DetectorConfig bad;
    bad.bandwidth = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CHECK(scheme_from_string("no_zfbf") == Scheme::no_zfbf);
    CHECK_THROWS_AS((void)scheme_from_string("mmse"), ValidationError);
}

TEST_CASE("rate from snr") {
    CHECK(rate_from_snr(0.0, 10e9) == 0.0);
    CHECK(rate_from_snr(2 * pi / e, 1.0) == doctest::Approx(0.5));
    CHECK(rate_from_snr(3.933e6, 10e9) == doctest::Approx(1.035e11).epsilon(1e-3));
    CHECK(rate_from_snr(3.933e6, 10e9) == doctest::Approx(hand_rate(3.933e6, 10e9)));
}

TEST_CASE("sinr without precoding") {
    DetectorConfig det;
    const auto budget = PowerBudget::from_dbm(10.0);
    ComplexMatrix h(1, 1, {{std::sqrt(0.29), 0.0}});
    const double hand = 500.0 * 0.49 * 0.01 * 0.01 * 0.29 * 0.29 / thermal();
    const auto s = sinr_no_zfbf(h, det, budget);
    CHECK(s[0] == doctest::Approx(hand));
    CHECK(s[0] == doctest::Approx(3.93e6).epsilon(2e-3));
    CHECK(10.0 * std::log10(s[0]) == doctest::Approx(65.9).epsilon(1e-3));

    const auto twice = sinr_no_zfbf(h, det, PowerBudget{0.02});
    CHECK(twice[0] == doctest::Approx(4.0 * s[0]));

    const auto c = capacity_no_zfbf(h, det, budget);
    CHECK(c.aggregate == doctest::Approx(hand_rate(hand, 10e9)));
    CHECK(c.aggregate == doctest::Approx(0.103e12).epsilon(0.01));

    // Interference grows X_k and pushes the SINR toward zero.
    double prev = 1e300;
    for (double x : {0.0, 0.1, 1.0, 10.0, 1000.0}) {
        const auto v = sinr_no_zfbf(real2(0.5, x, x, 0.5), det, budget)[0];
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev < 1e-3 * s[0]);

    CHECK(capacity_no_zfbf(ComplexMatrix(3, 3), det, budget).aggregate == 0.0);
}

TEST_CASE("diagonal channel has no interference") {
    DetectorConfig det;
    const auto budget = PowerBudget::from_dbm(10.0);
    const auto H = real2(0.6, 0.0, 0.0, 0.4);
    const auto c = capacity_no_zfbf(H, det, budget);
    double sum = 0.0;
    for (double h : {0.6, 0.4}) {
        const double snr = 500.0 * 0.49 * std::pow(0.005 * h * h, 2) / thermal();
        sum += hand_rate(snr, 10e9);
    }
    CHECK(c.aggregate == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("zfbf precoder") {
    const auto id = zfbf_precoder(ComplexMatrix::identity(3));
    CHECK(id.inverse == ComplexMatrix::identity(3));
    CHECK(id.condition == 1.0);

    const auto p = zfbf_precoder(real2(1.0, 0.3, 0.3, 1.0));
    const double s = 1.0 / 0.91;
    CHECK(p.inverse(0, 0).real() == doctest::Approx(s));
    CHECK(p.inverse(0, 1).real() == doctest::Approx(-0.3 * s));
    CHECK(p.inverse(1, 0).real() == doctest::Approx(-0.3 * s));
    CHECK(p.inverse(1, 1).real() == doctest::Approx(s));

    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 1 + t % 6;
        ComplexMatrix A(n, n);
        for (auto& v : A.data()) v = {g(rng), g(rng)};
        const auto inv = zfbf_precoder(A).inverse;
        CHECK(max_abs_difference(A * inv, ComplexMatrix::identity(n)) < 1e-10);
    }

    CHECK_THROWS_AS((void)zfbf_precoder(real2(1.0, 2.0, 0.5, 1.0)), SingularChannel);
    CHECK_THROWS_AS((void)zfbf_precoder(ComplexMatrix(2, 3)), DimensionMismatch);
}

TEST_CASE("zfbf power allocation") {
    CHECK(zfbf_power_allocation(ComplexMatrix::identity(4), 0.01) == doctest::Approx(0.0025));

    const ComplexMatrix P = real2(1.0989, -0.32967, -0.32967, 1.0989);
    // Hand evaluation: sum |P|^2 plus pi/4 times the within-row cross terms.
    const double sq = 2 * (1.0989 * 1.0989 + 0.32967 * 0.32967);
    const double cross = pi / 4 * 4 * (1.0989 * -0.32967);
    CHECK(sq + cross == doctest::Approx(1.4943).epsilon(1e-4));
    CHECK(zfbf_power_allocation(P, 0.01) == doctest::Approx(0.01 / (sq + cross)));
    CHECK(zfbf_power_allocation(P, 0.01) == doctest::Approx(6.692e-3).epsilon(1e-4));
    CHECK(zfbf_power_allocation(P, 0.07) == doctest::Approx(7.0 * zfbf_power_allocation(P, 0.01)));

    // The denominator is a mean power, so only a vanishing precoder trips it.
    const ComplexMatrix bad(3, 3);
    CHECK_THROWS_AS((void)zfbf_power_allocation(bad, 0.01), NegativeBudgetDenominator);
}

TEST_CASE("zfbf power budget holds on average") {
    // E||P s||^2 with independent Rayleigh s_i, E s_i^2 = xi, drawn independently here.
    const auto P = zfbf_precoder(real2(1.0, 0.3, 0.3, 1.0)).inverse;
    const double xi_t = 0.01;
    const double xi = zfbf_power_allocation(P, xi_t);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double acc = 0.0;
    const int draws = 100000;
    for (int j = 0; j < draws; ++j) {
        const std::vector<cplx> s{std::sqrt(-xi * std::log(1 - u(rng))), std::sqrt(-xi * std::log(1 - u(rng)))};
        for (const auto& v : P.apply(s)) acc += std::norm(v);
    }
    CHECK(acc / draws == doctest::Approx(xi_t).epsilon(0.01));
}

TEST_CASE("zfbf capacity") {
    DetectorConfig det;
    const auto budget = PowerBudget::from_dbm(10.0);
    const auto I1 = ComplexMatrix::identity(1);
    const double snr1 = 500.0 * 0.49 * 0.01 * 0.01 / thermal();
    CHECK(capacity_zfbf(I1, I1, det, budget).aggregate == doctest::Approx(hand_rate(snr1, 10e9)));
    CHECK(capacity_zfbf(I1, I1, det, PowerBudget{0.0}).aggregate == 0.0);

    const auto H = real2(1.0, 0.3, 0.3, 1.0);
    const double xi = 0.01 / 1.4943;
    const double snr2 = 500.0 * std::pow(0.7 * xi, 2) / thermal();
    const auto c = capacity_zfbf(H, H, det, budget);
    CHECK(c.aggregate == doctest::Approx(2 * hand_rate(snr2, 10e9)).epsilon(1e-5));
    CHECK(c.channel_power == doctest::Approx(6.692e-3).epsilon(1e-4));

    double prev = -1.0;
    for (double dbm = -15.0; dbm <= 30.0; dbm += 1.0) {
        const double v = capacity_zfbf(H, H, det, PowerBudget::from_dbm(dbm)).aggregate;
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("interference-free channels") {
    DetectorConfig det;
    const auto budget = PowerBudget::from_dbm(10.0);
    // Equal diagonal magnitudes: precoding only removes phases, both schemes agree.
    ComplexMatrix D(3, 3);
    D(0, 0) = std::polar(0.6, 0.3);
    D(1, 1) = std::polar(0.6, -2.0);
    D(2, 2) = std::polar(0.6, 1.1);
    const auto est = estimate_channel(D);
    CHECK(capacity_zfbf(D, est, det, budget).aggregate ==
          doctest::Approx(capacity_no_zfbf(D, det, budget).aggregate).epsilon(1e-12));

    // Aligned six-mode channel: diagonal, and each scheme matches its hand formula.
    LinkConfig config;
    const auto modes = first_oam_modes(6);
    const double diameter = 12e-3;
    const auto ens = config.ensemble(modes, diameter);
    const RealizationBank bank(ens, modes, diameter, MisalignmentStats{0, 0, 10.0}, 100, 1);
    const auto fiber = fiber_for_aperture(ens, diameter);
    const auto ch = build_channel_matrix(ens.source, modes, fiber, diameter, Misalignment{}, ens.quadrature);
    double inv_sum = 0.0, c_i = 0.0;
    for (std::size_t k = 0; k < 6; ++k) {
        for (std::size_t i = 0; i < 6; ++i)
            if (i != k) CHECK(std::abs(ch.H(k, i)) < 1e-8);
        const double g = std::norm(ch.H(k, k));
        inv_sum += 1.0 / g;
        c_i += hand_rate(500.0 * std::pow(0.7 * g * 0.01 / 6, 2) / thermal(), 10e9);
    }
    const double c_zf = 6 * hand_rate(500.0 * std::pow(0.7 * 0.01 / inv_sum, 2) / thermal(), 10e9);
    const std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5};
    CHECK(bank.capacity(Scheme::zfbf, idx, ens.detector, ens.budget).mean == doctest::Approx(c_zf).epsilon(1e-8));
    CHECK(bank.capacity(Scheme::no_zfbf, idx, ens.detector, ens.budget).mean == doctest::Approx(c_i).epsilon(1e-8));
}

TEST_CASE("capacity without precoding saturates at high power") {
    LinkConfig config;
    const std::vector<ModeIndex> modes = first_oam_modes(3);
    const double diameter = 20e-3;
    const auto ens = config.ensemble(modes, diameter);
    const RealizationBank bank(ens, modes, diameter, config.misalignment(), 200, 1);
    const std::vector<std::size_t> idx{0, 1, 2};
    const double c25 = bank.capacity(Scheme::no_zfbf, idx, ens.detector, PowerBudget::from_dbm(25)).mean;
    const double c30 = bank.capacity(Scheme::no_zfbf, idx, ens.detector, PowerBudget::from_dbm(30)).mean;
    CHECK((c30 - c25) / c25 < 0.05);
}

TEST_CASE("ensemble accumulator") {
    EnsembleAccumulator acc;
    for (double v : {1.0, 2.0, 3.0, 4.0}) acc.add(v);
    const auto s = acc.finish();
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK(s.used == 4);

    EnsembleAccumulator sing;
    for (int i = 0; i < 89; ++i) sing.add(1.0);
    for (int i = 0; i < 11; ++i) sing.add_singular();
    CHECK_THROWS_AS((void)sing.finish(), FractionSingular);

    EnsembleAccumulator ok;
    for (int i = 0; i < 90; ++i) ok.add(1.0);
    for (int i = 0; i < 10; ++i) ok.add_singular();
    CHECK(ok.finish().singular == 10);
}

TEST_CASE("ensemble capacity needs enough realizations") {
    LinkConfig config;
    const auto ens = config.ensemble(first_oam_modes(2), 6e-3);
    CHECK_THROWS_AS((void)ensemble_capacity(Scheme::zfbf, ens, config.misalignment(), 50, 1), ValidationError);
}
