#include "ffdpat/fourier.hpp"

#include <fftw3.h>
#include <omp.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace ffdpat {
namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int& configured_threads() {
  static int n = 0;
  return n;
}

void ensure_fftw_threads() {
  static const bool initialized = [] {
    if (fftw_init_threads() == 0) {
      throw std::runtime_error("fftw_init_threads failed");
    }
    return true;
  }();
  (void)initialized;
}

}  // namespace

void set_thread_count(int n) {
  if (n > 0) {
    omp_set_num_threads(n);
    configured_threads() = n;
  }
}

struct FourierMultiplier::Impl {
  Grid3 grid;
  std::size_t n_real = 0;
  std::size_t n_complex = 0;
  double* real = nullptr;
  fftw_complex* spectrum = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::vector<double> symbol;  // scaled by 1/n^3

  explicit Impl(const Grid3& g) : grid(g) {}
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    if (real) fftw_free(real);
    if (spectrum) fftw_free(spectrum);
  }
};

FourierMultiplier::FourierMultiplier(
    const Grid3& grid, const std::function<double(double)>& radial_symbol)
    : impl_(std::make_unique<Impl>(grid)) {
  const int n = grid.n();
  const int nh = n / 2 + 1;
  impl_->n_real = grid.size();
  impl_->n_complex = static_cast<std::size_t>(n) * n * nh;
  {
    std::lock_guard lock(planner_mutex());
    ensure_fftw_threads();
    const int threads =
        configured_threads() > 0 ? configured_threads() : omp_get_max_threads();
    fftw_plan_with_nthreads(threads);
    impl_->real = fftw_alloc_real(impl_->n_real);
    impl_->spectrum = fftw_alloc_complex(impl_->n_complex);
    if (!impl_->real || !impl_->spectrum) {
      throw std::bad_alloc();
    }
    // Row-major (z, y, x) matches x-fastest storage. FFTW_ESTIMATE keeps the
    // plan, and therefore the rounding, identical from run to run.
    impl_->forward = fftw_plan_dft_r2c_3d(n, n, n, impl_->real, impl_->spectrum,
                                          FFTW_ESTIMATE);
    impl_->backward = fftw_plan_dft_c2r_3d(n, n, n, impl_->spectrum,
                                           impl_->real, FFTW_ESTIMATE);
  }
  if (!impl_->forward || !impl_->backward) {
    throw std::runtime_error("fftw planning failed");
  }

  const double scale = 1.0 / static_cast<double>(impl_->n_real);
  impl_->symbol.resize(impl_->n_complex);
  for (int kz = 0; kz < n; ++kz) {
    const double xz = grid.wavenumber(kz);
    for (int ky = 0; ky < n; ++ky) {
      const double xy = grid.wavenumber(ky);
      for (int kx = 0; kx < nh; ++kx) {
        // Bin n/2 maps to -n/2; only the magnitude enters the symbol.
        const double xx = grid.wavenumber(kx);
        const double mag = std::sqrt(xx * xx + xy * xy + xz * xz);
        impl_->symbol[(static_cast<std::size_t>(kz) * n + ky) * nh + kx] =
            radial_symbol(mag) * scale;
      }
    }
  }
}

FourierMultiplier::~FourierMultiplier() = default;
FourierMultiplier::FourierMultiplier(FourierMultiplier&&) noexcept = default;
FourierMultiplier& FourierMultiplier::operator=(FourierMultiplier&&) noexcept =
    default;

const Grid3& FourierMultiplier::grid() const { return impl_->grid; }

void FourierMultiplier::apply(const Field3& in, Field3& out) {
  if (!(in.grid() == impl_->grid) || !(out.grid() == impl_->grid)) {
    throw std::invalid_argument("fourier multiplier: grid mismatch");
  }
  std::memcpy(impl_->real, in.data(), impl_->n_real * sizeof(double));
  fftw_execute(impl_->forward);
  const std::size_t nc = impl_->n_complex;
  fftw_complex* s = impl_->spectrum;
  const double* m = impl_->symbol.data();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < nc; ++i) {
    s[i][0] *= m[i];
    s[i][1] *= m[i];
  }
  fftw_execute(impl_->backward);
  std::memcpy(out.data(), impl_->real, impl_->n_real * sizeof(double));
}

Field3 FourierMultiplier::apply(const Field3& in) {
  Field3 out(impl_->grid);
  apply(in, out);
  return out;
}

}  // namespace ffdpat
