#include "biflow/kernel.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <mutex>

#include "biflow/errors.hpp"
#include "biflow/numerics.hpp"

namespace biflow {

namespace {

// Derivatives of J0. Closed forms develop 1/x cancellations near 0, so a
// series branch takes over for small arguments.
double j0_deriv(int k, double x) {
    if (x < 0.2) {
        const double x2 = x * x;
        switch (k) {
            case 0:
                return 1.0 - x2 / 4.0 + x2 * x2 / 64.0 - x2 * x2 * x2 / 2304.0;
            case 1:
                return -(x / 2.0 - x * x2 / 16.0 + x * x2 * x2 / 384.0);
            case 2:
                return -0.5 + 3.0 * x2 / 16.0 - 5.0 * x2 * x2 / 384.0 +
                       7.0 * x2 * x2 * x2 / 18432.0;
            case 3:
                return 3.0 * x / 8.0 - 5.0 * x * x2 / 96.0 + 7.0 * x * x2 * x2 / 3072.0;
        }
    }
    const double j0 = std::cyl_bessel_j(0.0, x);
    const double j1 = std::cyl_bessel_j(1.0, x);
    switch (k) {
        case 0: return j0;
        case 1: return -j1;
        case 2: return -j0 + j1 / x;
        case 3: return j1 + j0 / x - 2.0 * j1 / (x * x);
    }
    throw DomainError("j0_deriv: k out of range");
}

// Panel Gauss-Legendre integration of fn over [0, xi_max] with panel width
// small enough to resolve the oscillation period 2*pi/r.
double panel_integral(const std::function<double(double)>& fn, double r, double xi_max,
                      const KernelQuadOptions& opt, int* panels_out) {
    double width = opt.max_panel_width;
    if (r > 0.0) width = std::min(width, 2.0 * M_PI / r / opt.panels_per_period);
    const int panels = static_cast<int>(std::ceil(xi_max / width));
    if (panels > opt.max_panels)
        throw ResolutionError("kernel quadrature: panel budget exceeded (r too large)");
    if (panels_out) *panels_out = std::max(*panels_out, panels);

    static std::mutex mutex;
    static std::map<int, GaussRule> rules;
    GaussRule rule;
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = rules.find(opt.gl_order);
        if (it == rules.end()) it = rules.emplace(opt.gl_order, gauss_legendre(opt.gl_order)).first;
        rule = it->second;
    }

    const double h = xi_max / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = p * h;
        double local = 0.0;
        for (int q = 0; q < opt.gl_order; ++q) {
            const double xi = a + 0.5 * h * (1.0 + rule.nodes[q]);
            local += rule.weights[q] * fn(xi);
        }
        sum += 0.5 * h * local;
    }
    return sum;
}

double xi_max_for(const KernelQuadOptions& opt) {
    return 1.05 * std::pow(-std::log(opt.tail_eps), 0.25);
}

// g^(k)(r) by differentiating under the integral sign.
double g_deriv_1d(int k, double r, double xi_max, const KernelQuadOptions& opt, int* panels) {
    auto fn = [&](double xi) {
        const double damp = std::exp(-xi * xi * xi * xi);
        double xik = 1.0;
        for (int i = 0; i < k; ++i) xik *= xi;
        // d^k/dr^k cos(r xi) = xi^k * cos(r xi + k pi/2)
        return xik * std::cos(r * xi + 0.5 * M_PI * k) * damp;
    };
    return panel_integral(fn, r, xi_max, opt, panels) / M_PI;
}

double g_deriv_2d(int k, double r, double xi_max, const KernelQuadOptions& opt, int* panels) {
    auto fn = [&](double rho) {
        const double damp = std::exp(-rho * rho * rho * rho);
        double rk = rho;
        for (int i = 0; i < k; ++i) rk *= rho;
        return rk * j0_deriv(k, r * rho) * damp;
    };
    return panel_integral(fn, r, xi_max, opt, panels) / (2.0 * M_PI);
}

// Composite Simpson with interval doubling until the result is stable.
double refine_simpson(const std::function<double(double)>& fn, double a, double b,
                      double rel_tol, double abs_floor, int start_intervals = 2048,
                      int max_doublings = 8) {
    auto simpson = [&](int n) {
        const double h = (b - a) / n;
        double s = fn(a) + fn(b);
        for (int i = 1; i < n; ++i) s += fn(a + i * h) * (i % 2 ? 4.0 : 2.0);
        return s * h / 3.0;
    };
    int n = start_intervals;
    double prev = simpson(n);
    for (int d = 0; d < max_doublings; ++d) {
        n *= 2;
        const double cur = simpson(n);
        if (std::abs(cur - prev) <= std::max(rel_tol * std::abs(cur), abs_floor)) return cur;
        prev = cur;
    }
    throw ResolutionError("kernel integral did not converge under refinement");
}

}  // namespace

KernelProfile profile_g(const std::vector<double>& radii, int dim,
                        const KernelQuadOptions& options) {
    if (dim != 1 && dim != 2) throw ConfigError("profile_g: dim must be 1 or 2");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] >= 0.0) || !std::isfinite(radii[i]))
            throw DomainError("profile_g: radii must be finite and >= 0");
        if (i > 0 && !(radii[i] > radii[i - 1]))
            throw DomainError("profile_g: radii must be strictly ascending");
    }
    KernelProfile prof;
    prof.dim = dim;
    prof.radii = radii;
    const double xi_max = xi_max_for(options);
    prof.quadrature_meta.xi_max = xi_max;
    prof.quadrature_meta.gl_order = options.gl_order;
    int panels = 0;
    const std::size_t n = radii.size();
    prof.g.resize(n);
    prof.dg.resize(n);
    prof.d2g.resize(n);
    prof.d3g.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = radii[i];
        if (dim == 1) {
            prof.g[i] = g_deriv_1d(0, r, xi_max, options, &panels);
            prof.dg[i] = g_deriv_1d(1, r, xi_max, options, &panels);
            prof.d2g[i] = g_deriv_1d(2, r, xi_max, options, &panels);
            prof.d3g[i] = g_deriv_1d(3, r, xi_max, options, &panels);
        } else {
            prof.g[i] = g_deriv_2d(0, r, xi_max, options, &panels);
            prof.dg[i] = g_deriv_2d(1, r, xi_max, options, &panels);
            prof.d2g[i] = g_deriv_2d(2, r, xi_max, options, &panels);
            prof.d3g[i] = g_deriv_2d(3, r, xi_max, options, &panels);
        }
    }
    prof.quadrature_meta.max_panels_used = panels;
    return prof;
}

struct KernelEvaluator::Splines {
    CubicSpline s[4];
};

KernelEvaluator::KernelEvaluator(int dim, int dense_points, const KernelQuadOptions& options) {
    std::vector<double> radii;
    radii.reserve(dense_points + 1);
    radii.push_back(0.0);
    const double r0 = 1e-3, r1 = 50.0;
    const double ratio = std::log(r1 / r0) / (dense_points - 1);
    for (int i = 0; i < dense_points; ++i) radii.push_back(r0 * std::exp(ratio * i));
    profile_ = profile_g(radii, dim, options);
    auto sp = std::make_shared<Splines>();
    sp->s[0] = CubicSpline(profile_.radii, profile_.g);
    sp->s[1] = CubicSpline(profile_.radii, profile_.dg);
    sp->s[2] = CubicSpline(profile_.radii, profile_.d2g);
    sp->s[3] = CubicSpline(profile_.radii, profile_.d3g);
    splines_ = std::move(sp);
}

const KernelEvaluator& KernelEvaluator::instance(int dim) {
    if (dim != 1 && dim != 2) throw ConfigError("KernelEvaluator: dim must be 1 or 2");
    static KernelEvaluator e1(1);
    static KernelEvaluator e2(2);
    return dim == 1 ? e1 : e2;
}

double KernelEvaluator::g(int k, double r) const {
    if (k < 0 || k > 3) throw DomainError("KernelEvaluator::g: k out of range");
    r = std::abs(r);
    if (r >= r_max()) return 0.0;  // |g| < 1e-12 there (Schwartz decay, verified in tests)
    return splines_->s[k](r);
}

double KernelEvaluator::kernel_value(double r, double t) const {
    if (!(t > 0.0)) throw DomainError("kernel_value: t must be > 0");
    const double scale = std::pow(t, -0.25 * profile_.dim);
    return scale * g(0, std::abs(r) / std::pow(t, 0.25));
}

double kernel_value(double r, double t, int dim) {
    return KernelEvaluator::instance(dim).kernel_value(r, t);
}

double kernel_derivative_l1(int k, double t, int dim, double rel_tol) {
    if (!(t > 0.0)) throw DomainError("kernel_derivative_l1: t must be > 0");
    if (k < 0 || k > 3) throw DomainError("kernel_derivative_l1: k out of range");
    const KernelEvaluator& ev = KernelEvaluator::instance(dim);
    const double t4 = std::pow(t, 0.25);
    if (dim == 1) {
        // |d^k/dx^k b(x,t)| = t^{-(1+k)/4} |g^(k)(|x|/t^{1/4})|, even in x.
        const double scale = std::pow(t, -0.25 * (1 + k));
        const double X = ev.r_max() * t4;
        auto fn = [&](double x) { return scale * std::abs(ev.g(k, x / t4)); };
        return 2.0 * refine_simpson(fn, 0.0, X, rel_tol, 1e-12);
    }
    if (k > 1)
        throw DomainError("kernel_derivative_l1: n=2 supports k in {0,1} only");
    // Radial: |b| or |grad b| = |g'(r/t^{1/4})| t^{-(2+k)/4}; integrate 2 pi r dr.
    const double scale = std::pow(t, -0.25 * (2 + k));
    const double X = ev.r_max() * t4;
    auto fn = [&](double r) { return 2.0 * M_PI * r * scale * std::abs(ev.g(k, r / t4)); };
    return refine_simpson(fn, 0.0, X, rel_tol, 1e-12);
}

std::pair<double, double> moment_check(double t, int dim) {
    if (!(t > 0.0)) throw DomainError("moment_check: t must be > 0");
    const KernelEvaluator& ev = KernelEvaluator::instance(dim);
    const double t4 = std::pow(t, 0.25);
    if (dim == 1) {
        const double X = ev.r_max() * t4;
        auto b = [&](double x) { return ev.kernel_value(x, t); };
        const double mass = refine_simpson(b, -X, X, 1e-10, 1e-10);
        auto db = [&](double x) {
            const double s = x < 0 ? -1.0 : 1.0;
            return s * std::pow(t, -0.5) * ev.g(1, std::abs(x) / t4);
        };
        const double grad = refine_simpson(db, -X, X, 1e-10, 1e-10);
        return {mass, grad};
    }
    const double X = ev.r_max() * t4;
    auto radial_mass = [&](double r) { return 2.0 * M_PI * r * ev.kernel_value(r, t); };
    const double mass = refine_simpson(radial_mass, 0.0, X, 1e-10, 1e-10);
    // d_x b integrates to (int_0^2pi cos theta dtheta) * (radial factor); both
    // factors evaluated numerically.
    double ang = 0.0;
    const int na = 256;
    for (int i = 0; i < na; ++i) ang += std::cos(2.0 * M_PI * i / na) * (2.0 * M_PI / na);
    auto radial_grad = [&](double r) {
        return r * std::pow(t, -0.75) * ev.g(1, r / t4);
    };
    const double rad = refine_simpson(radial_grad, 0.0, X, 1e-10, 1e-10);
    return {mass, ang * rad};
}

void write_profile_csv(std::ostream& out, const KernelProfile& profile) {
    out << "r,g,g',g''\n";
    char buf[128];
    for (std::size_t i = 0; i < profile.radii.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", profile.radii[i],
                      profile.g[i], profile.dg[i], profile.d2g[i]);
        out << buf;
    }
}

}  // namespace biflow
