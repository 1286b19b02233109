#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace biflow::fft {

/// Real-to-complex transform sizes for an N^dim grid: the last axis is
/// stored half-plane (N/2+1), the others full.
std::size_t spectral_size(int dim, int n);

/// Forward transform, normalized so the output holds Fourier-series
/// coefficients: u(x_j) = sum_m c_m exp(i k_m . x_j).
void forward(int dim, int n, const double* values, std::complex<double>* coeffs);

/// Inverse of `forward`. The input is copied internally (FFTW's c2r
/// destroys its input).
void inverse(int dim, int n, const std::complex<double>* coeffs, double* values);

}  // namespace biflow::fft
