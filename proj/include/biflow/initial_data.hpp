#pragma once

#include <cstdint>
#include <vector>

#include "biflow/grid.hpp"

namespace biflow {

/// Periodized Gaussian bump amplitude * exp(-|x-center|^2 / (2 width^2)).
/// The center defaults to the box midpoint; widths should stay well below
/// box_length/8 so the wrap-around tail is negligible.
Field gaussian_bump(const GridSpec& grid, double amplitude, double width,
                    const std::vector<double>& center = {});

/// Sum of Gaussian bumps.
struct Bump {
    double amplitude;
    double width;
    std::vector<double> center;
};
Field bump_sum(const GridSpec& grid, const std::vector<Bump>& bumps);

/// Real single Fourier mode: amplitude * sin(k . x + phase).
Field single_mode(const GridSpec& grid, const std::vector<int>& mode, double amplitude,
                  double phase = 0.0);

/// Band-limited noise: random-phase coefficients with magnitude |m|^alpha on
/// modes with m_min <= max_axis|m| <= m_max, scaled so the sup-norm equals
/// `amplitude`. alpha = 0 is white noise; alpha = -dim/2 makes the sup-norm
/// of grad^k S(t)a decay like t^{-k/4} (it saturates the semigroup bound).
/// Deterministic for a fixed seed.
Field band_noise(const GridSpec& grid, int m_min, int m_max, double amplitude,
                 std::uint64_t seed, double spectral_exponent = 0.0);

/// Log-spaced radii for radial profiles.
std::vector<double> log_radii(double r0, double r1, int count);

}  // namespace biflow
