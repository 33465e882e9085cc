#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "smmlink/errors.hpp"
#include "smmlink/misalignment.hpp"
#include "smmlink/quadrature.hpp"

using namespace smmlink;
using std::numbers::pi;
using cplx = std::complex<double>;

TEST_CASE("gauss-legendre textbook rules") {
    const auto r2 = gauss_legendre_nodes(2);
    CHECK(r2.nodes[0] == doctest::Approx(-1.0 / std::sqrt(3.0)));
    CHECK(r2.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(r2.weights[0] == doctest::Approx(1.0));
    CHECK(r2.weights[1] == doctest::Approx(1.0));

    const auto r3 = gauss_legendre_nodes(3);
    CHECK(r3.nodes[0] == doctest::Approx(-std::sqrt(0.6)));
    CHECK(std::abs(r3.nodes[1]) < 1e-15);
    CHECK(r3.nodes[2] == doctest::Approx(std::sqrt(0.6)));
    CHECK(r3.weights[0] == doctest::Approx(5.0 / 9));
    CHECK(r3.weights[1] == doctest::Approx(8.0 / 9));

    for (int n : {2, 5, 16, 64, 257, 1024}) {
        const auto r = gauss_legendre_nodes(n);
        double s = 0.0;
        for (double w : r.weights) s += w;
        CHECK(s == doctest::Approx(2.0).epsilon(1e-13));
        for (std::size_t i = 1; i < r.nodes.size(); ++i) CHECK(r.nodes[i] > r.nodes[i - 1]);
    }
    CHECK_THROWS_AS((void)gauss_legendre_nodes(1), ValidationError);
}

TEST_CASE("polynomial exactness up to degree 2n-1") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (int n : {2, 3, 7, 12, 32}) {
        std::vector<double> c(2 * n);
        for (double& v : c) v = coef(rng);
        auto poly = [&](double x) {
            double s = 0.0;
            for (std::size_t m = c.size(); m-- > 0;) s = s * x + c[m];
            return s;
        };
        // Exact integral over [-0.5, 2].
        double exact = 0.0;
        for (std::size_t m = 0; m < c.size(); ++m)
            exact += c[m] * (std::pow(2.0, m + 1.0) - std::pow(-0.5, m + 1.0)) / (m + 1.0);
        CHECK(integrate_1d(poly, -0.5, 2.0, n) == doctest::Approx(exact).epsilon(1e-11));
    }
}

TEST_CASE("aperture integrals") {
    QuadratureSpec spec;
    CHECK(integrate_2d([](double, double) { return cplx{1.0, 0.0}; }, spec).value.real() ==
          doctest::Approx(2 * pi));
    CHECK(integrate_2d([](double x, double) { return cplx{x, 0.0}; }, spec).value.real() ==
          doctest::Approx(pi));
    const auto ring = integrate_2d([](double, double th) { return std::polar(1.0, th); }, spec);
    CHECK(std::abs(ring.value) < 1e-12);

    spec.angular_rule = AngularRule::gauss_legendre;
    CHECK(integrate_2d([](double x, double) { return cplx{x, 0.0}; }, spec).value.real() ==
          doctest::Approx(pi));
}

TEST_CASE("refinement converges on a smooth oscillatory integrand") {
    QuadratureSpec spec;
    spec.radial_order = 16;
    spec.angular_order = 16;
    spec.max_doublings = 6;
    // int_0^1 int_0^2pi exp(j 3 x cos th) dth dx = 2 pi int_0^1 J0(3x) dx
    const auto q = integrate_2d(
        [](double x, double th) { return std::exp(cplx{0.0, 3.0 * x * std::cos(th)}); }, spec);
    const double ref = 2 * pi * integrate_1d([](double x) { return std::cyl_bessel_j(0.0, 3.0 * x); }, 0, 1, 64);
    CHECK(q.converged);
    CHECK(q.value.real() == doctest::Approx(ref).epsilon(1e-9));
    CHECK(std::abs(q.value.imag()) < 1e-12);
}

TEST_CASE("quadrature spec validation") {
    QuadratureSpec bad;
    bad.radial_order = 100;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad.radial_order = 4;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    QuadratureSpec tol;
    tol.rel_tol = 0.0;
    CHECK_THROWS_AS(tol.validate(), ValidationError);
}

TEST_CASE("rayleigh expectation rule") {
    const double sigma = 0.125e-3;
    const auto rule = rayleigh_rule(sigma, 32);
    double w = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        w += rule.weights[i];
        m1 += rule.weights[i] * rule.nodes[i];
        m2 += rule.weights[i] * rule.nodes[i] * rule.nodes[i];
    }
    CHECK(w == doctest::Approx(1.0).epsilon(1e-14));
    // Truncation at 5 sigma loses exp(-12.5) of the mass.
    CHECK(m1 == doctest::Approx(sigma * std::sqrt(pi / 2)).epsilon(1e-4));
    CHECK(m2 == doctest::Approx(2 * sigma * sigma).epsilon(1e-4));

    const auto zero = rayleigh_rule(0.0, 32);
    REQUIRE(zero.nodes.size() == 1);
    CHECK(zero.nodes[0] == 0.0);
    CHECK(zero.weights[0] == 1.0);
}
