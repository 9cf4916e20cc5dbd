#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "sonoclass/matrix.hpp"
#include "sonoclass/spectrogram.hpp"

namespace sonoclass {

/// Parameters of a polar-separable log-Gabor bank.
///
/// The radial factor is exp(-(ln(r/f0))^2 / (2 (ln sigma_ratio)^2)) with r in
/// cycles/pixel; the angular factor is exp(-dtheta^2 / (2 sigma_theta^2)) with
/// dtheta the wrapped distance to the orientation angle. Orientation n
/// (0-based) sits at n * pi / n_orientations.
struct LogGaborParams {
  std::vector<double> f0_per_scale{1.0 / 3.0, 1.0 / 6.0};
  std::size_t n_orientations = 6;
  double sigma_ratio = 0.65;
  double sigma_theta = 0.6545;

  std::size_t n_scales() const noexcept { return f0_per_scale.size(); }
  std::size_t n_filters() const noexcept { return n_scales() * n_orientations; }
  double orientation_angle(std::size_t orientation) const;
  void validate() const;

  // Center frequencies 1/3, 1/6, 1/12, ... (one octave apart).
  static std::vector<double> octave_frequencies(std::size_t n_scales);
};

// Unnormalized transfer function at polar frequency (r, theta); 0 at r = 0.
double log_gabor_transfer(double r, double theta, double f0, double theta0,
                          const LogGaborParams& params);

/// Frequency-domain masks on an R x T grid, in FFT storage order (DC at
/// (0, 0), row frequency (i <= R/2 ? i : i - R) / R, likewise for columns).
/// Each mask is divided by its maximum over the grid, so every filter peaks
/// at exactly 1; the DC sample is exactly 0.
class LogGaborBank {
 public:
  LogGaborBank(std::size_t rows, std::size_t cols, LogGaborParams params,
               std::vector<RealMatrix> filters);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return filters_.size(); }
  const LogGaborParams& params() const noexcept { return params_; }
  std::span<const RealMatrix> filters() const noexcept { return filters_; }
  // 0-based scale and orientation; throws FilterIndexOutOfRange.
  const RealMatrix& filter(std::size_t scale, std::size_t orientation) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  LogGaborParams params_;
  std::vector<RealMatrix> filters_;  // scale-major
};

// Throws GridTooSmall unless rows, cols >= 8.
LogGaborBank build_bank(std::size_t rows, std::size_t cols, const LogGaborParams& params);

// Magnitude of IFFT2(FFT2(values) .* mask). Throws ShapeMismatch.
RealMatrix apply_filter(const RealMatrix& values, const RealMatrix& mask);

// All filters of a bank with a single forward transform; bitwise identical
// to calling apply_filter per mask.
std::vector<RealMatrix> apply_bank(const RealMatrix& values, const LogGaborBank& bank);

// Elementwise mean, accumulated in input order and divided once.
RealMatrix average_bank(std::span<const RealMatrix> responses);

std::vector<double> flatten(const RealMatrix& m);

struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
};

inline constexpr std::size_t kPatchGridRows = 128;

// The low/mid/high frequency bands used by the patch method:
// [0, 43), [43, 86), [86, 128) on the 128-row grid.
std::array<RowRange, 3> spectrogram_bands(std::size_t rows);

// Method 1: one filter's magnitude, flattened row-major (1-based scale and
// orientation, matching the CLI).
std::vector<double> method1_feature(const FixedSpectrogram& spec, const LogGaborBank& bank,
                                    std::size_t scale, std::size_t orientation);

// Method 2: average of every bank response, flattened.
std::vector<double> method2_feature(const FixedSpectrogram& spec, const LogGaborBank& bank);

// Banks sized to the three frequency bands, built once and reused.
class BandBanks {
 public:
  BandBanks(std::size_t rows, std::size_t cols, const LogGaborParams& params);

  const std::array<RowRange, 3>& ranges() const noexcept { return ranges_; }
  const LogGaborBank& bank(std::size_t band) const { return banks_.at(band); }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::array<RowRange, 3> ranges_;
  std::vector<LogGaborBank> banks_;
};

// Method 3: each band gets its own averaged bank; the three flattened
// results are concatenated low | mid | high. Requires 128 rows (BadGrid).
std::vector<double> method3_feature(const FixedSpectrogram& spec, const BandBanks& bands);
std::vector<double> method3_feature(const FixedSpectrogram& spec, const LogGaborBank& bank);

}  // namespace sonoclass
