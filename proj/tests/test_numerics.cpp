#include <doctest.h>

#include <cmath>

#include "biflow/numerics.hpp"

using namespace biflow;

TEST_CASE("gauss_legendre integrates polynomials exactly") {
    const GaussRule rule = gauss_legendre(8);
    // degree 15 is exact for an 8-point rule
    double s = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double x = rule.nodes[i];
        s += rule.weights[i] * (std::pow(x, 14) + 3.0 * std::pow(x, 5));
    }
    CHECK(s == doctest::Approx(2.0 / 15.0).epsilon(1e-13));  // odd part cancels
}

TEST_CASE("cubic spline reproduces smooth functions") {
    std::vector<double> x, y;
    for (int i = 0; i <= 200; ++i) {
        x.push_back(0.02 * i);
        y.push_back(std::sin(x.back()));
    }
    CubicSpline s(x, y);
    // Natural end conditions cost O(h^2) near the boundary; the interior is
    // fourth order.
    double err_interior = 0.0, err_full = 0.0;
    for (int i = 0; i < 500; ++i) {
        const double xx = 0.008 * i + 0.003;
        const double e = std::abs(s(xx) - std::sin(xx));
        err_full = std::max(err_full, e);
        if (xx > 0.5 && xx < 3.5) err_interior = std::max(err_interior, e);
    }
    CHECK(err_interior < 1e-8);
    CHECK(err_full < 1e-4);
}

TEST_CASE("fornberg weights recover derivatives on non-uniform nodes") {
    const std::vector<double> nodes{0.9, 1.02, 1.1, 1.19, 1.33};
    auto f = [](double x) { return x * x * x; };
    const auto w1 = fornberg_weights(1.1, nodes, 1);
    const auto w2 = fornberg_weights(1.1, nodes, 2);
    double d1 = 0.0, d2 = 0.0;
    for (int i = 0; i < 5; ++i) {
        d1 += w1[i] * f(nodes[i]);
        d2 += w2[i] * f(nodes[i]);
    }
    CHECK(d1 == doctest::Approx(3.0 * 1.1 * 1.1).epsilon(1e-12));
    CHECK(d2 == doctest::Approx(6.0 * 1.1).epsilon(1e-12));
}

TEST_CASE("line fit recovers slope and r2") {
    std::vector<double> x, y;
    for (int i = 0; i < 20; ++i) {
        x.push_back(i);
        y.push_back(2.5 * i - 1.0);
    }
    const LineFit fit = fit_line(x, y);
    CHECK(fit.slope == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rng is deterministic per seed") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 10; ++i) {
        const double x = a.uniform();
        CHECK(x == b.uniform());
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
    CHECK(a.normal() == b.normal());
    CHECK(a.uniform() != c.uniform());
}

TEST_CASE("exp panel weights match quadrature of the exact kernel") {
    // Compare against dense Simpson integration of e^{-z mu} mu and
    // e^{-z mu}(1-mu) over [0,1].
    for (double z : {0.0, 1e-6, 0.01, 0.4, 0.6, 3.0, 50.0}) {
        double a_ref = 0.0, b_ref = 0.0;
        const int n = 20000;
        for (int i = 0; i <= n; ++i) {
            const double mu = double(i) / n;
            const double w = (i == 0 || i == n) ? 0.5 : 1.0;
            a_ref += w * std::exp(-z * mu) * mu / n;
            b_ref += w * std::exp(-z * mu) * (1.0 - mu) / n;
        }
        const auto [a, b] = exp_panel_weights(z);
        CHECK(a == doctest::Approx(a_ref).epsilon(1e-7));
        CHECK(b == doctest::Approx(b_ref).epsilon(1e-7));
    }
    // z -> 0 limit is the plain trapezoid
    const auto [a0, b0] = exp_panel_weights(0.0);
    CHECK(a0 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(b0 == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("etd phi1 matches expm1 reference on both branches") {
    CHECK(etd_phi1(0.0) == doctest::Approx(1.0));
    for (double z : {-5e-5, -9.9e-5, -1.1e-4, -2.0, -1e4}) {
        const double ref = std::expm1(z) / z;
        CHECK(etd_phi1(z) == doctest::Approx(ref).epsilon(1e-12));
    }
}
