#include "biflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "biflow/errors.hpp"
#include "biflow/fft.hpp"

namespace biflow {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

std::size_t GridSpec::point_count() const {
    std::size_t n = 1;
    for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(points_per_axis);
    return n;
}

double GridSpec::cell_volume() const {
    double v = 1.0;
    for (int d = 0; d < dim; ++d) v *= spacing();
    return v;
}

std::array<double, 3> GridSpec::coords(std::size_t flat) const {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    const double h = spacing();
    for (int d = dim - 1; d >= 0; --d) {
        x[d] = h * static_cast<double>(flat % points_per_axis);
        flat /= points_per_axis;
    }
    return x;
}

GridSpec make_grid(int dim, int points_per_axis, double box_length) {
    if (dim < 1 || dim > 3)
        throw ConfigError("make_grid: dim must be 1, 2 or 3");
    if (!is_power_of_two(points_per_axis) || points_per_axis < 16)
        throw ConfigError("make_grid: points_per_axis must be a power of two >= 16");
    if (!(box_length > 0.0))
        throw ConfigError("make_grid: box_length must be positive");
    GridSpec g;
    g.dim = dim;
    g.points_per_axis = points_per_axis;
    g.box_length = box_length;
    g.modes.resize(points_per_axis);
    g.wavenumbers.resize(points_per_axis);
    for (int m = 0; m < points_per_axis; ++m) {
        const int ms = m < points_per_axis / 2 ? m : m - points_per_axis;
        g.modes[m] = ms;
        g.wavenumbers[m] = 2.0 * M_PI * ms / box_length;
    }
    return g;
}

struct Field::Data {
    GridSpec grid;
    mutable std::vector<double> values;
    mutable std::vector<std::complex<double>> spectral;
    mutable std::once_flag values_once, spectral_once;
    bool has_values = false, has_spectral = false;
};

Field Field::from_values(GridSpec grid, std::vector<double> values) {
    auto d = std::make_shared<Data>();
    if (values.size() != grid.point_count())
        throw DomainError("Field::from_values: size mismatch");
    d->grid = std::move(grid);
    d->values = std::move(values);
    d->has_values = true;
    return Field(std::move(d));
}

Field Field::from_spectral(GridSpec grid, std::vector<std::complex<double>> coeffs) {
    auto d = std::make_shared<Data>();
    if (coeffs.size() != fft::spectral_size(grid.dim, grid.points_per_axis))
        throw DomainError("Field::from_spectral: size mismatch");
    d->grid = std::move(grid);
    d->spectral = std::move(coeffs);
    d->has_spectral = true;
    return Field(std::move(d));
}

Field Field::zero(const GridSpec& grid) {
    return from_values(grid, std::vector<double>(grid.point_count(), 0.0));
}

const GridSpec& Field::grid() const { return data_->grid; }

const std::vector<double>& Field::values() const {
    const Data& d = *data_;
    if (!d.has_values) {
        std::call_once(d.values_once, [&d] {
            d.values.resize(d.grid.point_count());
            fft::inverse(d.grid.dim, d.grid.points_per_axis, d.spectral.data(), d.values.data());
        });
    }
    return d.values;
}

const std::vector<std::complex<double>>& Field::spectral() const {
    const Data& d = *data_;
    if (!d.has_spectral) {
        std::call_once(d.spectral_once, [&d] {
            d.spectral.resize(fft::spectral_size(d.grid.dim, d.grid.points_per_axis));
            fft::forward(d.grid.dim, d.grid.points_per_axis, d.values.data(), d.spectral.data());
        });
    }
    return d.spectral;
}

double Field::sup_norm() const {
    double m = 0.0;
    for (double v : values()) m = std::max(m, std::abs(v));
    return m;
}

double Field::mean() const {
    double s = 0.0;
    for (double v : values()) s += v;
    return s / static_cast<double>(values().size());
}

Field operator+(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid())) throw DomainError("field +: grid mismatch");
    std::vector<double> out(a.values());
    const auto& bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    return Field::from_values(a.grid(), std::move(out));
}

Field operator-(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid())) throw DomainError("field -: grid mismatch");
    std::vector<double> out(a.values());
    const auto& bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
    return Field::from_values(a.grid(), std::move(out));
}

Field operator*(double s, const Field& a) {
    std::vector<double> out(a.values());
    for (double& v : out) v *= s;
    return Field::from_values(a.grid(), std::move(out));
}

Field add_constant(const Field& a, double c) {
    std::vector<double> out(a.values());
    for (double& v : out) v += c;
    return Field::from_values(a.grid(), std::move(out));
}

std::vector<double> pointwise_magnitude(const TensorField& t) {
    std::vector<double> mag(t.grid.point_count(), 0.0);
    for (const Field& c : t.components) {
        const auto& v = c.values();
        for (std::size_t i = 0; i < mag.size(); ++i) mag[i] += v[i] * v[i];
    }
    for (double& m : mag) m = std::sqrt(m);
    return mag;
}

namespace {

// Iterate the r2c coefficient layout, producing signed modes and wavevector.
template <typename F>
void for_each_mode(const GridSpec& g, F&& body) {
    const int n = g.points_per_axis;
    const int nlast = n / 2 + 1;
    std::array<int, 3> mode{0, 0, 0};
    std::array<double, 3> k{0.0, 0.0, 0.0};
    std::size_t flat = 0;
    const int n0 = g.dim >= 2 ? n : 1;
    const int n1 = g.dim >= 3 ? n : 1;
    // Axes are ordered so the half-range axis is the last (fastest) one.
    for (int a = 0; a < n0; ++a) {
        for (int b = 0; b < n1; ++b) {
            for (int c = 0; c < nlast; ++c, ++flat) {
                if (g.dim == 1) {
                    mode[0] = (c == n / 2) ? -n / 2 : c;  // last axis runs 0..n/2
                    k[0] = 2.0 * M_PI * mode[0] / g.box_length;
                } else if (g.dim == 2) {
                    mode[0] = g.modes[a];
                    mode[1] = (c == n / 2) ? -n / 2 : c;
                    k[0] = g.wavenumbers[a];
                    k[1] = 2.0 * M_PI * mode[1] / g.box_length;
                } else {
                    mode[0] = g.modes[a];
                    mode[1] = g.modes[b];
                    mode[2] = (c == n / 2) ? -n / 2 : c;
                    k[0] = g.wavenumbers[a];
                    k[1] = g.wavenumbers[b];
                    k[2] = 2.0 * M_PI * mode[2] / g.box_length;
                }
                body(flat, mode, k);
            }
        }
    }
}

}  // namespace

Field apply_multiplier(
    const Field& f,
    const std::function<std::complex<double>(const std::array<int, 3>&, const std::array<double, 3>&)>& mult) {
    std::vector<std::complex<double>> out(f.spectral());
    for_each_mode(f.grid(), [&](std::size_t flat, const std::array<int, 3>& mode,
                                const std::array<double, 3>& k) { out[flat] *= mult(mode, k); });
    return Field::from_spectral(f.grid(), std::move(out));
}

Field derivative(const Field& f, const std::array<int, 3>& alpha) {
    const GridSpec& g = f.grid();
    int total = 0;
    for (int d = 0; d < 3; ++d) {
        if (alpha[d] < 0) throw DomainError("derivative: negative order");
        if (d >= g.dim && alpha[d] != 0)
            throw DomainError("derivative: multi-index exceeds dimension");
        total += alpha[d];
    }
    if (total > 4) throw DomainError("derivative: order > 4 unsupported");
    if (total == 0) return f;

    const int nyq = -g.points_per_axis / 2;
    std::vector<std::complex<double>> out(f.spectral());
    for_each_mode(g, [&](std::size_t flat, const std::array<int, 3>& mode,
                         const std::array<double, 3>& k) {
        std::complex<double> m(1.0, 0.0);
        for (int d = 0; d < g.dim; ++d) {
            if (alpha[d] == 0) continue;
            if (mode[d] == nyq && (alpha[d] % 2 != 0)) {
                m = 0.0;  // keep real fields real
                break;
            }
            const std::complex<double> ik(0.0, k[d]);
            for (int p = 0; p < alpha[d]; ++p) m *= ik;
        }
        out[flat] *= m;
    });
    return Field::from_spectral(g, std::move(out));
}

Field apply_semigroup(const Field& f, double t) {
    if (t < 0.0) throw DomainError("apply_semigroup: t must be >= 0");
    if (t == 0.0) return f;
    std::vector<std::complex<double>> out(f.spectral());
    for_each_mode(f.grid(), [&](std::size_t flat, const std::array<int, 3>&,
                                const std::array<double, 3>& k) {
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        out[flat] *= std::exp(-t * k2 * k2);
    });
    return Field::from_spectral(f.grid(), std::move(out));
}

namespace {

// Builds the dim^k tensor of partial derivatives of `base`, computing each
// distinct sorted multi-index once and sharing the Field across symmetric
// slots.
TensorField derivative_tensor_of(const Field& base, int k) {
    const GridSpec& g = base.grid();
    TensorField t;
    t.grid = g;
    t.order = k;
    const std::size_t count = [&] {
        std::size_t c = 1;
        for (int i = 0; i < k; ++i) c *= static_cast<std::size_t>(g.dim);
        return c;
    }();
    t.components.resize(count);

    std::vector<std::array<int, 3>> alpha_of(count, {0, 0, 0});
    for (std::size_t flat = 0; flat < count; ++flat) {
        std::size_t rest = flat;
        std::array<int, 3> alpha{0, 0, 0};
        for (int i = 0; i < k; ++i) {
            alpha[rest % g.dim]++;
            rest /= g.dim;
        }
        alpha_of[flat] = alpha;
    }
    // Cache by multi-index so symmetric entries share one Field.
    std::vector<std::pair<std::array<int, 3>, Field>> cache;
    for (std::size_t flat = 0; flat < count; ++flat) {
        const auto& alpha = alpha_of[flat];
        auto it = std::find_if(cache.begin(), cache.end(),
                               [&](const auto& e) { return e.first == alpha; });
        if (it == cache.end()) {
            cache.emplace_back(alpha, derivative(base, alpha));
            it = std::prev(cache.end());
        }
        t.components[flat] = it->second;
    }
    return t;
}

}  // namespace

TensorField semigroup_derivative(const Field& f, double t, int k) {
    if (!(t > 0.0)) throw DomainError("semigroup_derivative: t must be > 0");
    if (k < 1 || k > 3) throw DomainError("semigroup_derivative: k must be in {1,2,3}");
    return derivative_tensor_of(apply_semigroup(f, t), k);
}

TensorField derivative_tensor(const Field& f, int k) {
    if (k < 1 || k > 3) throw DomainError("derivative_tensor: k must be in {1,2,3}");
    return derivative_tensor_of(f, k);
}

std::vector<double> kappa4_table(const GridSpec& g) {
    std::vector<double> kappa(fft::spectral_size(g.dim, g.points_per_axis));
    for_each_mode(g, [&](std::size_t flat, const std::array<int, 3>&,
                         const std::array<double, 3>& k) {
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        kappa[flat] = k2 * k2;
    });
    return kappa;
}

std::vector<std::array<double, 3>> gradient_wavevectors(const GridSpec& g) {
    std::vector<std::array<double, 3>> kv(fft::spectral_size(g.dim, g.points_per_axis));
    const int nyq = -g.points_per_axis / 2;
    for_each_mode(g, [&](std::size_t flat, const std::array<int, 3>& mode,
                         const std::array<double, 3>& k) {
        std::array<double, 3> kk{0.0, 0.0, 0.0};
        for (int d = 0; d < g.dim; ++d) kk[d] = (mode[d] == nyq) ? 0.0 : k[d];
        kv[flat] = kk;
    });
    return kv;
}

Field dealias(const Field& f) {
    const GridSpec& g = f.grid();
    const int cutoff = g.points_per_axis / 3;
    std::vector<std::complex<double>> out(f.spectral());
    for_each_mode(g, [&](std::size_t flat, const std::array<int, 3>& mode,
                         const std::array<double, 3>&) {
        for (int d = 0; d < g.dim; ++d) {
            if (std::abs(mode[d]) > cutoff) {
                out[flat] = 0.0;
                return;
            }
        }
    });
    return Field::from_spectral(g, std::move(out));
}

}  // namespace biflow
