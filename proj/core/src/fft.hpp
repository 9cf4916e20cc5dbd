#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

#include "sonoclass/matrix.hpp"

namespace sonoclass::detail {

// Thin RAII layer over FFTW. Plans are built with FFTW_ESTIMATE, so the
// same sizes always produce the same plan and bitwise-identical output.
// Planning is serialized internally; execution on distinct objects is
// thread-safe.

class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return n_; }
  // Writes the n/2+1 non-negative frequency bins of the unnormalized DFT.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

class Fft2d {
 public:
  Fft2d(std::size_t rows, std::size_t cols);
  ~Fft2d();
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  // Unnormalized forward transform of a real matrix (full complex spectrum).
  ComplexMatrix forward(const RealMatrix& in);
  // Inverse transform scaled by 1/(rows*cols).
  ComplexMatrix inverse(const ComplexMatrix& in);

 private:
  struct Impl;
  std::size_t rows_;
  std::size_t cols_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sonoclass::detail
