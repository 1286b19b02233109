#include "biflow/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace biflow::fft {

namespace {

struct PlanPair {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
};

// Plan creation is not thread-safe in FFTW; executing via the new-array
// interface is. Plans are cached per (dim, n) and created with
// FFTW_UNALIGNED so they can run on plain std::vector storage.
PlanPair& plans_for(int dim, int n) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, PlanPair> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto key = std::make_pair(dim, n);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    std::size_t real_n = 1;
    for (int d = 0; d < dim; ++d) real_n *= static_cast<std::size_t>(n);
    const std::size_t cplx_n = spectral_size(dim, n);

    std::vector<double> rbuf(real_n);
    std::vector<std::complex<double>> cbuf(cplx_n);
    int dims[3] = {n, n, n};

    PlanPair pp;
    pp.r2c = fftw_plan_dft_r2c(dim, dims, rbuf.data(),
                               reinterpret_cast<fftw_complex*>(cbuf.data()),
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
    pp.c2r = fftw_plan_dft_c2r(dim, dims, reinterpret_cast<fftw_complex*>(cbuf.data()),
                               rbuf.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!pp.r2c || !pp.c2r) throw std::runtime_error("fftw plan creation failed");
    return cache.emplace(key, pp).first->second;
}

}  // namespace

std::size_t spectral_size(int dim, int n) {
    std::size_t sz = static_cast<std::size_t>(n / 2 + 1);
    for (int d = 1; d < dim; ++d) sz *= static_cast<std::size_t>(n);
    return sz;
}

void forward(int dim, int n, const double* values, std::complex<double>* coeffs) {
    PlanPair& pp = plans_for(dim, n);
    std::size_t real_n = 1;
    for (int d = 0; d < dim; ++d) real_n *= static_cast<std::size_t>(n);
    std::vector<double> in(values, values + real_n);  // r2c may destroy input
    fftw_execute_dft_r2c(pp.r2c, in.data(), reinterpret_cast<fftw_complex*>(coeffs));
    const double scale = 1.0 / static_cast<double>(real_n);
    const std::size_t cn = spectral_size(dim, n);
    for (std::size_t i = 0; i < cn; ++i) coeffs[i] *= scale;
}

void inverse(int dim, int n, const std::complex<double>* coeffs, double* values) {
    PlanPair& pp = plans_for(dim, n);
    const std::size_t cn = spectral_size(dim, n);
    std::vector<std::complex<double>> in(coeffs, coeffs + cn);
    fftw_execute_dft_c2r(pp.c2r, reinterpret_cast<fftw_complex*>(in.data()), values);
}

}  // namespace biflow::fft
