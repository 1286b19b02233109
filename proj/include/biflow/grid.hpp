#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace biflow {

/// Periodic box discretization: an N^dim grid on a torus of side L.
/// N must be a power of two (>= 16), dim in {1,2,3}.
struct GridSpec {
    int dim = 1;
    int points_per_axis = 0;
    double box_length = 0.0;

    /// Signed integer mode numbers per axis index: m, m < N/2 ? m : m - N.
    std::vector<int> modes;
    /// Wavenumbers k_m = 2*pi*m/L aligned with `modes`.
    std::vector<double> wavenumbers;

    std::size_t point_count() const;
    double spacing() const { return box_length / points_per_axis; }
    double cell_volume() const;
    /// Physical coordinate of a flat row-major index.
    std::array<double, 3> coords(std::size_t flat) const;

    bool operator==(const GridSpec& o) const {
        return dim == o.dim && points_per_axis == o.points_per_axis &&
               box_length == o.box_length;
    }
};

GridSpec make_grid(int dim, int points_per_axis, double box_length);

/// Immutable real scalar field on a grid. Sample values and spectral
/// coefficients are two views of the same data; whichever was not given at
/// construction is computed lazily and cached. All operations on fields are
/// pure, so fields are safe to share across threads.
class Field {
  public:
    Field() = default;

    static Field from_values(GridSpec grid, std::vector<double> values);
    static Field from_spectral(GridSpec grid, std::vector<std::complex<double>> coeffs);
    static Field zero(const GridSpec& grid);

    const GridSpec& grid() const;
    const std::vector<double>& values() const;
    const std::vector<std::complex<double>>& spectral() const;

    double sup_norm() const;
    double mean() const;
    bool valid() const { return data_ != nullptr; }

  private:
    struct Data;
    explicit Field(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
    std::shared_ptr<const Data> data_;
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& a);
Field add_constant(const Field& a, double c);

/// dim^order fields holding the components of grad^k u, row-major in the
/// index tuple; derivative tensors share storage across symmetric slots.
struct TensorField {
    GridSpec grid;
    int order = 1;
    std::vector<Field> components;

    std::size_t component_count() const { return components.size(); }
    const Field& at(std::size_t flat) const { return components[flat]; }
};

/// Pointwise Frobenius magnitude sqrt(sum over components of c^2).
std::vector<double> pointwise_magnitude(const TensorField& t);

/// Spectral partial derivative; |alpha| <= 4. The Nyquist mode is zeroed on
/// axes with odd derivative order so real fields stay real.
Field derivative(const Field& f, const std::array<int, 3>& alpha);

/// Apply S(t) = exp(-t Delta^2) as the Fourier multiplier exp(-t|k|^4).
/// t = 0 returns the field unchanged; t < 0 is a domain error.
Field apply_semigroup(const Field& f, double t);

/// grad^k S(t) f for k in {1,2,3}, t > 0, via combined multipliers.
TensorField semigroup_derivative(const Field& f, double t, int k);

/// grad^k f (no smoothing), k in {1,2,3}.
TensorField derivative_tensor(const Field& f, int k);

/// Zero every coefficient with any axis mode |m| > N/3 (cubic two-thirds
/// rule; applied around every nonlinear product).
Field dealias(const Field& f);

/// General diagonal Fourier multiplier; `mult` receives the signed mode
/// tuple and the wavenumber vector.
Field apply_multiplier(
    const Field& f,
    const std::function<std::complex<double>(const std::array<int, 3>&, const std::array<double, 3>&)>& mult);

/// |k|^4 per spectral slot (the semigroup symbol).
std::vector<double> kappa4_table(const GridSpec& g);

/// Wavevector per spectral slot with Nyquist components zeroed: the
/// first-derivative multiplier vector (divergence, gradients).
std::vector<std::array<double, 3>> gradient_wavevectors(const GridSpec& g);

}  // namespace biflow
