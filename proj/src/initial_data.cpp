#include "biflow/initial_data.hpp"

#include <cmath>

#include "biflow/errors.hpp"
#include "biflow/fft.hpp"
#include "biflow/numerics.hpp"

namespace biflow {

namespace {

double periodic_dist2(const GridSpec& g, const std::array<double, 3>& x,
                      const std::vector<double>& c) {
    double d2 = 0.0;
    for (int d = 0; d < g.dim; ++d) {
        double dx = std::abs(x[d] - c[d]);
        dx = std::min(dx, g.box_length - dx);
        d2 += dx * dx;
    }
    return d2;
}

}  // namespace

Field gaussian_bump(const GridSpec& grid, double amplitude, double width,
                    const std::vector<double>& center) {
    if (!(width > 0.0)) throw DomainError("gaussian_bump: width must be > 0");
    std::vector<double> c = center;
    if (c.empty()) c.assign(grid.dim, grid.box_length / 2.0);
    if (static_cast<int>(c.size()) != grid.dim)
        throw DomainError("gaussian_bump: center dimension mismatch");
    std::vector<double> v(grid.point_count());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d2 = periodic_dist2(grid, grid.coords(i), c);
        v[i] = amplitude * std::exp(-d2 / (2.0 * width * width));
    }
    return Field::from_values(grid, std::move(v));
}

Field bump_sum(const GridSpec& grid, const std::vector<Bump>& bumps) {
    Field acc = Field::zero(grid);
    for (const Bump& b : bumps) acc = acc + gaussian_bump(grid, b.amplitude, b.width, b.center);
    return acc;
}

Field single_mode(const GridSpec& grid, const std::vector<int>& mode, double amplitude,
                  double phase) {
    if (static_cast<int>(mode.size()) != grid.dim)
        throw DomainError("single_mode: mode dimension mismatch");
    std::vector<double> v(grid.point_count());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto x = grid.coords(i);
        double arg = phase;
        for (int d = 0; d < grid.dim; ++d)
            arg += 2.0 * M_PI * mode[d] * x[d] / grid.box_length;
        v[i] = amplitude * std::sin(arg);
    }
    return Field::from_values(grid, std::move(v));
}

Field band_noise(const GridSpec& grid, int m_min, int m_max, double amplitude,
                 std::uint64_t seed, double spectral_exponent) {
    if (m_min < 1 || m_max < m_min) throw DomainError("band_noise: need 1 <= m_min <= m_max");
    if (m_max > grid.points_per_axis / 3)
        throw DomainError("band_noise: band exceeds the dealias cutoff N/3");
    Rng rng(seed);
    const std::size_t cn = fft::spectral_size(grid.dim, grid.points_per_axis);
    std::vector<std::complex<double>> c(cn, 0.0);
    const int n = grid.points_per_axis;
    const int nlast = n / 2 + 1;
    std::size_t flat = 0;
    const int n0 = grid.dim >= 2 ? n : 1;
    const int n1 = grid.dim >= 3 ? n : 1;
    auto signed_mode = [&](int idx) { return idx < n / 2 ? idx : idx - n; };
    for (int a = 0; a < n0; ++a) {
        for (int b = 0; b < n1; ++b) {
            for (int cc = 0; cc < nlast; ++cc, ++flat) {
                int m0 = 0, m1 = 0, m2 = 0;
                if (grid.dim == 1) {
                    m0 = cc == n / 2 ? -n / 2 : cc;
                } else if (grid.dim == 2) {
                    m0 = signed_mode(a);
                    m1 = cc == n / 2 ? -n / 2 : cc;
                } else {
                    m0 = signed_mode(a);
                    m1 = signed_mode(b);
                    m2 = cc == n / 2 ? -n / 2 : cc;
                }
                int mabs = std::abs(m0);
                mabs = std::max(mabs, std::abs(m1));
                mabs = std::max(mabs, std::abs(m2));
                if (mabs < m_min || mabs > m_max) continue;
                const double phase = rng.uniform(0.0, 2.0 * M_PI);
                const double m_euc =
                    std::sqrt(double(m0) * m0 + double(m1) * m1 + double(m2) * m2);
                c[flat] = std::polar(std::pow(m_euc, spectral_exponent), phase);
            }
        }
    }
    // The m_last = 0 (and Nyquist) planes need explicit conjugate symmetry in
    // dims >= 2; rather than pair slots by hand, symmetrize through a
    // round-trip: values of Re(ifft) correspond to (c + conj-reflection)/2.
    Field f = Field::from_spectral(grid, std::move(c));
    Field sym = Field::from_values(grid, f.values());  // re-transform drops the odd part
    Field clean = Field::from_spectral(grid, sym.spectral());
    const double sup = clean.sup_norm();
    if (!(sup > 0.0)) throw DomainError("band_noise: degenerate draw");
    return (amplitude / sup) * clean;
}

std::vector<double> log_radii(double r0, double r1, int count) {
    if (!(r0 > 0.0) || !(r1 > r0) || count < 2) throw DomainError("log_radii: bad arguments");
    std::vector<double> r(count);
    const double step = std::log(r1 / r0) / (count - 1);
    for (int i = 0; i < count; ++i) r[i] = r0 * std::exp(step * i);
    return r;
}

}  // namespace biflow
