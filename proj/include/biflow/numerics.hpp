#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace biflow {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussRule gauss_legendre(int order);

/// Natural cubic spline on strictly ascending, possibly non-uniform nodes.
/// Evaluation outside the node range clamps to the end values.
class CubicSpline {
  public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    bool empty() const { return x_.empty(); }
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

  private:
    std::vector<double> x_, y_, m_;  // m_ = second derivatives at nodes
};

/// Finite-difference weights for the d-th derivative at x0 from arbitrary
/// stencil nodes (Fornberg's recurrence).
std::vector<double> fornberg_weights(double x0, const std::vector<double>& nodes, int order);

/// Least-squares line fit y ~ slope*x + intercept with coefficient of
/// determination.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Deterministic RNG: mt19937_64 plus a hand-rolled Box-Muller normal so
/// that streams do not depend on the standard library's distribution
/// implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    double uniform();                       // [0, 1)
    double uniform(double lo, double hi);   // [lo, hi)
    double normal();                        // standard normal
    std::uint64_t next_u64();

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// phi1(z) = (e^z - 1)/z with a series branch near 0.
double etd_phi1(double z);

/// Weights of the exponential product-trapezoid: with z = kappa*h >= 0,
///   integral_0^h e^{-kappa (h-tau)} * lerp(f0, f1; tau/h) dtau
///     = h * (f0 * A(z) + f1 * B(z)),
///   A(z) = (1 - (1+z) e^{-z}) / z^2,   B(z) = (z - 1 + e^{-z}) / z^2.
/// Both tend to 1/2 as z -> 0 (plain trapezoid limit).
std::pair<double, double> exp_panel_weights(double z);

/// Trapezoid integral of samples y over nodes x (non-uniform).
double trapezoid(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace biflow
