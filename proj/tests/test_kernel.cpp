#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "biflow/errors.hpp"
#include "biflow/grid.hpp"
#include "biflow/initial_data.hpp"
#include "biflow/kernel.hpp"
#include "biflow/numerics.hpp"

using namespace biflow;

TEST_CASE("profile value at the origin matches the closed form") {
    // g(0) = (1/pi) int_0^inf e^{-xi^4} dxi = Gamma(5/4)/pi under the
    // mass-one normalization.
    const KernelProfile p = profile_g({0.0}, 1);
    CHECK(p.g[0] == doctest::Approx(std::tgamma(1.25) / M_PI).epsilon(1e-12));
    CHECK(p.g[0] == doctest::Approx(0.2885168693).epsilon(1e-9));
    // derivative of the even profile vanishes at 0
    CHECK(std::abs(p.dg[0]) < 1e-14);
}

TEST_CASE("profile input validation") {
    CHECK_THROWS_AS(profile_g({1.0, 0.5}, 1), DomainError);   // not ascending
    CHECK_THROWS_AS(profile_g({-1.0, 0.5}, 1), DomainError);  // negative
    CHECK_THROWS_AS(profile_g({1.0}, 3), ConfigError);        // unsupported dim
    KernelQuadOptions tiny;
    tiny.max_panels = 4;
    CHECK_THROWS_AS(profile_g({100.0}, 1, tiny), ResolutionError);  // panel budget
}

TEST_CASE("profile mass: trapezoid over [-20,20] integrates to 1") {
    std::vector<double> radii;
    for (int i = 0; i <= 4000; ++i) radii.push_back(20.0 * i / 4000.0);
    const KernelProfile p = profile_g(radii, 1);
    // reflect evenly about 0
    double mass = 0.0;
    for (std::size_t i = 1; i < radii.size(); ++i)
        mass += 0.5 * (p.g[i] + p.g[i - 1]) * (radii[i] - radii[i - 1]);
    mass *= 2.0;
    CHECK(std::abs(mass - 1.0) < 1e-6);
}

TEST_CASE("profile oscillates: g changes sign on (0, 10)") {
    std::vector<double> radii;
    for (int i = 1; i <= 100; ++i) radii.push_back(0.1 * i);
    const KernelProfile p = profile_g(radii, 1);
    bool sign_change = false;
    for (std::size_t i = 1; i < p.g.size(); ++i)
        if (p.g[i] * p.g[i - 1] < 0.0) sign_change = true;
    CHECK(sign_change);
}

TEST_CASE("profile quadrature converges under refinement") {
    KernelQuadOptions fine;
    fine.gl_order = 24;
    fine.panels_per_period = 16;
    fine.max_panel_width = 0.125;
    fine.tail_eps = 1e-20;
    const std::vector<double> radii{0.3, 1.7, 4.4, 9.9, 19.5};
    for (int dim : {1, 2}) {
        const KernelProfile a = profile_g(radii, dim);
        const KernelProfile b = profile_g(radii, dim, fine);
        for (std::size_t i = 0; i < radii.size(); ++i) {
            CHECK(std::abs(a.g[i] - b.g[i]) <= 1e-8);
            CHECK(std::abs(a.dg[i] - b.dg[i]) <= 1e-8);
            CHECK(std::abs(a.d2g[i] - b.d2g[i]) <= 1e-8);
        }
    }
}

TEST_CASE("cached evaluator tracks direct quadrature and decays beyond 50") {
    const KernelEvaluator& ev = KernelEvaluator::instance(1);
    double max_err = 0.0;
    for (int i = 0; i < 40; ++i) {
        const double r = 0.05 + 0.5 * i;
        const KernelProfile direct = profile_g({r}, 1);
        max_err = std::max(max_err, std::abs(ev.g(0, r) - direct.g[0]));
    }
    CHECK(max_err < 1e-8);
    // Schwartz decay: treating the tail as zero is below 1e-12
    const KernelProfile tail = profile_g({45.0, 49.9}, 1);
    CHECK(std::abs(tail.g[0]) < 1e-12);
    CHECK(std::abs(tail.g[1]) < 1e-12);
    CHECK(ev.g(0, 55.0) == 0.0);
}

TEST_CASE("kernel_value: origin, domain errors, self-similarity") {
    CHECK(kernel_value(0.0, 1.0, 1) == doctest::Approx(std::tgamma(1.25) / M_PI).epsilon(1e-9));
    CHECK_THROWS_AS(kernel_value(1.0, 0.0, 1), DomainError);
    CHECK_THROWS_AS(kernel_value(1.0, -2.0, 1), DomainError);

    // b(lambda x, lambda^4 t) = lambda^{-n} b(x, t)
    for (int dim : {1, 2}) {
        for (double lam : {2.0, 3.7}) {
            for (double x : {0.4, 1.3, 2.9}) {
                const double lhs = kernel_value(lam * x, std::pow(lam, 4.0) * 0.7, dim);
                const double rhs = std::pow(lam, -dim) * kernel_value(x, 0.7, dim);
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("kernel convolution agrees with the spectral semigroup") {
    // Narrow Gaussian bump on a wide box; direct convolution with the kernel
    // from the cached profile vs the Fourier-multiplier semigroup.
    const GridSpec g = make_grid(1, 512, 40.0);
    const Field u0 = gaussian_bump(g, 1.0, 0.8);
    const double t = 1.0;
    const Field oracle = apply_semigroup(u0, t);

    const double h = g.spacing();
    const auto& v = u0.values();
    double max_err = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double conv = 0.0;
        const double xi = h * static_cast<double>(i);
        for (std::size_t j = 0; j < v.size(); ++j) {
            double dx = std::abs(xi - h * static_cast<double>(j));
            dx = std::min(dx, g.box_length - dx);  // periodic image
            conv += kernel_value(dx, t, 1) * v[j] * h;
        }
        max_err = std::max(max_err, std::abs(conv - oracle.values()[i]));
    }
    CHECK(max_err <= 1e-4);
}

TEST_CASE("derivative L1 norms: bounds, scaling, direct cross-check") {
    // mass 1 plus oscillation overshoot
    for (double t : {0.5, 1.0, 2.0}) {
        const double l1 = kernel_derivative_l1(0, t, 1);
        CHECK(l1 >= 1.0);
        CHECK(l1 <= 1.5);
    }
    // t^{k/4} |grad^k b|_L1 constant within 1%
    for (int k = 0; k <= 3; ++k) {
        std::vector<double> vals;
        for (double t : {0.25, 1.0, 4.0})
            vals.push_back(std::pow(t, 0.25 * k) * kernel_derivative_l1(k, t, 1));
        const double mean = (vals[0] + vals[1] + vals[2]) / 3.0;
        for (double v : vals) CHECK(std::abs(v - mean) / mean < 0.01);
    }
    // at t = 1 the k = 1 norm is the profile integral of |g'|
    std::vector<double> radii;
    for (int i = 0; i <= 60000; ++i) radii.push_back(50.0 * i / 60000.0);
    const KernelEvaluator& ev = KernelEvaluator::instance(1);
    std::vector<double> absdg;
    absdg.reserve(radii.size());
    for (double r : radii) absdg.push_back(std::abs(ev.g(1, r)));
    const double direct = 2.0 * trapezoid(radii, absdg);
    CHECK(kernel_derivative_l1(1, 1.0, 1) == doctest::Approx(direct).epsilon(1e-6));

    CHECK_THROWS_AS(kernel_derivative_l1(2, 1.0, 2), DomainError);  // n=2 supports k<=1
    CHECK_THROWS_AS(kernel_derivative_l1(0, -1.0, 1), DomainError);
}

TEST_CASE("moments are (1, 0) at all scales and dimensions") {
    for (double t : {0.1, 1.0, 10.0}) {
        const auto [mass, grad] = moment_check(t, 1);
        CHECK(std::abs(mass - 1.0) < 1e-6);
        CHECK(std::abs(grad) < 1e-6);
    }
    const auto [mass2, grad2] = moment_check(1.0, 2);
    CHECK(std::abs(mass2 - 1.0) < 1e-5);
    CHECK(std::abs(grad2) < 1e-5);
    CHECK_THROWS_AS(moment_check(0.0, 1), DomainError);
}

TEST_CASE("pointwise bound constant is finite and t-stable") {
    // |grad^k b(x,t)| (t^{1/4}+|x|)^{n+k} bounded over (x,t) samples
    const KernelEvaluator& ev = KernelEvaluator::instance(1);
    for (int k = 0; k <= 3; ++k) {
        double cmin = INFINITY, cmax = 0.0;
        for (double t : {0.1, 0.5, 1.0, 2.0, 4.0}) {
            double c = 0.0;
            for (int i = 0; i <= 100; ++i) {
                const double x = 0.1 * i;
                const double val = std::pow(t, -0.25 * (1 + k)) * ev.g(k, x / std::pow(t, 0.25));
                c = std::max(c, std::abs(val) * std::pow(std::pow(t, 0.25) + x, 1 + k));
            }
            cmin = std::min(cmin, c);
            cmax = std::max(cmax, c);
        }
        CHECK(std::isfinite(cmax));
        CHECK((cmax - cmin) <= 0.2 * 0.5 * (cmax + cmin));  // +-10% around the mean
    }
}

TEST_CASE("profile CSV emission") {
    const KernelProfile p = profile_g({0.5, 1.0}, 1);
    std::ostringstream out;
    write_profile_csv(out, p);
    const std::string csv = out.str();
    CHECK(csv.substr(0, 11) == "r,g,g',g''\n");
    // 17 significant digits means full double round trip
    std::istringstream in(csv);
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    double r, gv, dgv, d2gv;
    CHECK(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &r, &gv, &dgv, &d2gv) == 4);
    CHECK(r == 0.5);
    CHECK(gv == p.g[0]);
    CHECK(dgv == p.dg[0]);
}
