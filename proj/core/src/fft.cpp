#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>

#include "sonoclass/error.hpp"

namespace sonoclass::detail {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename T>
T* fft_alloc(std::size_t n) {
  void* p = fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1));
  if (p == nullptr) throw std::bad_alloc();
  return static_cast<T*>(p);
}

}  // namespace

struct RealFft::Impl {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;
};

RealFft::RealFft(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n == 0) throw Error(Errc::kInvalidArgument, "FFT size must be positive");
  impl_->in = fft_alloc<double>(n);
  impl_->out = fft_alloc<fftw_complex>(n / 2 + 1);
  std::lock_guard lock(planner_mutex());
  impl_->plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), impl_->in, impl_->out,
                                     FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  {
    std::lock_guard lock(planner_mutex());
    if (impl_->plan) fftw_destroy_plan(impl_->plan);
  }
  fftw_free(impl_->in);
  fftw_free(impl_->out);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.end(), impl_->in);
  fftw_execute(impl_->plan);
  const std::size_t bins = n_ / 2 + 1;
  for (std::size_t k = 0; k < bins; ++k) {
    out[k] = {impl_->out[k][0], impl_->out[k][1]};
  }
}

struct Fft2d::Impl {
  fftw_complex* buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

Fft2d::Fft2d(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), impl_(std::make_unique<Impl>()) {
  if (rows == 0 || cols == 0) throw Error(Errc::kInvalidArgument, "empty FFT grid");
  impl_->buf = fft_alloc<fftw_complex>(rows * cols);
  std::lock_guard lock(planner_mutex());
  const int r = static_cast<int>(rows);
  const int c = static_cast<int>(cols);
  impl_->fwd = fftw_plan_dft_2d(r, c, impl_->buf, impl_->buf, FFTW_FORWARD, FFTW_ESTIMATE);
  impl_->inv = fftw_plan_dft_2d(r, c, impl_->buf, impl_->buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft2d::~Fft2d() {
  {
    std::lock_guard lock(planner_mutex());
    if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
    if (impl_->inv) fftw_destroy_plan(impl_->inv);
  }
  fftw_free(impl_->buf);
}

ComplexMatrix Fft2d::forward(const RealMatrix& in) {
  const auto src = in.flat();
  for (std::size_t i = 0; i < src.size(); ++i) {
    impl_->buf[i][0] = src[i];
    impl_->buf[i][1] = 0.0;
  }
  fftw_execute(impl_->fwd);
  ComplexMatrix out(rows_, cols_);
  auto dst = out.flat();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = {impl_->buf[i][0], impl_->buf[i][1]};
  return out;
}

ComplexMatrix Fft2d::inverse(const ComplexMatrix& in) {
  const auto src = in.flat();
  for (std::size_t i = 0; i < src.size(); ++i) {
    impl_->buf[i][0] = src[i].real();
    impl_->buf[i][1] = src[i].imag();
  }
  fftw_execute(impl_->inv);
  const double scale = 1.0 / static_cast<double>(rows_ * cols_);
  ComplexMatrix out(rows_, cols_);
  auto dst = out.flat();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = {impl_->buf[i][0] * scale, impl_->buf[i][1] * scale};
  }
  return out;
}

}  // namespace sonoclass::detail
