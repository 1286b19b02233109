#pragma once

#include <memory>
#include <ostream>
#include <utility>
#include <vector>

namespace biflow {

/// Quadrature controls for the kernel profile integrals.
struct KernelQuadOptions {
    int gl_order = 16;            // Gauss-Legendre points per panel
    double tail_eps = 1e-16;      // truncate at xi_max with exp(-xi_max^4) <= tail_eps
    double max_panel_width = 0.25;
    int panels_per_period = 8;    // resolve the cos(r xi) / J0(r xi) oscillation
    int max_panels = 100000;      // exceeded -> ResolutionError
};

struct KernelQuadMeta {
    double xi_max = 0.0;
    int gl_order = 0;
    int max_panels_used = 0;
};

/// Radial profile g of the biharmonic heat kernel b(x,t) = t^{-n/4} g(x/t^{1/4}),
/// normalized so that the kernel has unit mass, together with radial
/// derivatives up to order three.
struct KernelProfile {
    int dim = 1;  // n in {1,2}
    std::vector<double> radii;
    std::vector<double> g, dg, d2g, d3g;
    KernelQuadMeta quadrature_meta;
};

/// Direct quadrature evaluation of g and its derivatives at the given radii.
///   n=1: g(r) = (1/pi)    int_0^inf cos(r xi) exp(-xi^4) dxi
///   n=2: g(r) = (1/2pi)   int_0^inf J0(r rho) exp(-rho^4) rho drho
KernelProfile profile_g(const std::vector<double>& radii, int dim,
                        const KernelQuadOptions& options = {});

/// Cached dense profile (r = 0 plus a geometric ladder on [1e-3, 50]) with
/// cubic-spline evaluation. Beyond r = 50 the kernel is treated as zero.
/// Instances are immutable once built; evaluation is thread-safe.
class KernelEvaluator {
  public:
    explicit KernelEvaluator(int dim, int dense_points = 4096,
                             const KernelQuadOptions& options = {});

    /// Shared evaluator per dimension, built once.
    static const KernelEvaluator& instance(int dim);

    int dim() const { return profile_.dim; }
    double r_max() const { return 50.0; }
    /// k-th radial derivative of g, k in {0,..,3}.
    double g(int k, double r) const;
    /// b(x,t) for |x| = r: t^{-n/4} g(r / t^{1/4}); t <= 0 is a domain error.
    double kernel_value(double r, double t) const;
    const KernelProfile& profile() const { return profile_; }

  private:
    KernelProfile profile_;
    struct Splines;
    std::shared_ptr<const Splines> splines_;
};

/// b(|x|, t) through the shared evaluator.
double kernel_value(double r, double t, int dim);

/// L1 norm of grad^k b(.,t), integrated numerically in physical space at the
/// given t (no self-similar shortcut, so scaling checks are meaningful).
/// n=1 supports k in {0..3}; n=2 supports k in {0,1}.
double kernel_derivative_l1(int k, double t, int dim, double rel_tol = 1e-8);

/// (mass, first-derivative integral) of b(.,t): expected (1, 0).
std::pair<double, double> moment_check(double t, int dim);

/// CSV emission: columns r,g,g',g'' with a header row, 17 significant digits.
void write_profile_csv(std::ostream& out, const KernelProfile& profile);

}  // namespace biflow
