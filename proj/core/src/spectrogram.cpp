#include "sonoclass/spectrogram.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "sonoclass/error.hpp"

namespace sonoclass {

void StftParams::validate() const {
  if (frame_size < 2) throw Error(Errc::kInvalidArgument, "frame_size must be >= 2");
  if (hop == 0 || hop > frame_size) {
    throw Error(Errc::kInvalidArgument, "hop must satisfy 0 < hop <= frame_size");
  }
  if (!(log_floor > 0.0)) throw Error(Errc::kInvalidArgument, "log_floor must be positive");
}

std::vector<double> hamming_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom);
  }
  return w;
}

std::size_t frame_count(std::size_t n_samples, const StftParams& params) {
  if (n_samples < params.frame_size) return 0;
  return (n_samples - params.frame_size) / params.hop + 1;
}

ComplexMatrix stft(std::span<const double> samples, const StftParams& params) {
  params.validate();
  if (samples.size() < params.frame_size) {
    throw Error(Errc::kClipTooShort, std::to_string(samples.size()) +
                                         " samples is shorter than one frame of " +
                                         std::to_string(params.frame_size));
  }
  const std::size_t frames = frame_count(samples.size(), params);
  const std::size_t bins = params.bins();
  const auto window = hamming_window(params.frame_size);

  detail::RealFft fft(params.frame_size);
  std::vector<double> frame(params.frame_size);
  std::vector<std::complex<double>> spectrum(bins);
  ComplexMatrix out(bins, frames);
  for (std::size_t x = 0; x < frames; ++x) {
    const std::size_t start = x * params.hop;
    for (std::size_t n = 0; n < params.frame_size; ++n) {
      frame[n] = samples[start + n] * window[n];
    }
    fft.forward(frame, spectrum);
    for (std::size_t y = 0; y < bins; ++y) out(y, x) = spectrum[y];
  }
  return out;
}

ComplexMatrix stft(const AudioClip& clip, const StftParams& params) {
  return stft(clip.samples(), params);
}

Spectrogram log_magnitude(const ComplexMatrix& transform, double log_floor) {
  if (!(log_floor > 0.0)) throw Error(Errc::kInvalidArgument, "log_floor must be positive");
  Spectrogram s;
  s.params.log_floor = log_floor;
  s.values = RealMatrix(transform.rows(), transform.cols());
  const auto src = transform.flat();
  auto dst = s.values.flat();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = std::log(std::max(std::abs(src[i]), log_floor));
  }
  return s;
}

Spectrogram compute_spectrogram(const AudioClip& clip, const StftParams& params) {
  Spectrogram s = log_magnitude(stft(clip, params), params.log_floor);
  s.params = params;
  s.bin_hz = static_cast<double>(clip.sample_rate()) / static_cast<double>(params.frame_size);
  return s;
}

RealMatrix resize_bilinear(const RealMatrix& in, std::size_t rows, std::size_t cols) {
  if (in.rows() < 2 || in.cols() < 2) {
    throw Error(Errc::kDegenerateInput, "bilinear resize needs at least 2 rows and 2 columns");
  }
  if (rows < 2 || cols < 2) {
    throw Error(Errc::kInvalidArgument, "target grid needs at least 2 rows and 2 columns");
  }
  const double row_step = static_cast<double>(in.rows() - 1) / static_cast<double>(rows - 1);
  const double col_step = static_cast<double>(in.cols() - 1) / static_cast<double>(cols - 1);

  // Precompute column taps once; they are shared by every output row.
  std::vector<std::size_t> c0(cols);
  std::vector<double> cw(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    const double pos = static_cast<double>(j) * col_step;
    c0[j] = std::min(static_cast<std::size_t>(pos), in.cols() - 2);
    cw[j] = pos - static_cast<double>(c0[j]);
  }

  RealMatrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const double pos = static_cast<double>(i) * row_step;
    const std::size_t r0 = std::min(static_cast<std::size_t>(pos), in.rows() - 2);
    const double rw = pos - static_cast<double>(r0);
    const auto top = in.row(r0);
    const auto bottom = in.row(r0 + 1);
    for (std::size_t j = 0; j < cols; ++j) {
      const double a = top[c0[j]] + cw[j] * (top[c0[j] + 1] - top[c0[j]]);
      const double b = bottom[c0[j]] + cw[j] * (bottom[c0[j] + 1] - bottom[c0[j]]);
      out(i, j) = a + rw * (b - a);
    }
  }
  return out;
}

FixedSpectrogram to_fixed(const RealMatrix& values, std::size_t rows, std::size_t cols) {
  if (values.empty()) throw Error(Errc::kDegenerateInput, "empty spectrogram");
  FixedSpectrogram fixed;
  fixed.values = resize_bilinear(values, rows, cols);
  const auto [lo, hi] = std::minmax_element(fixed.values.flat().begin(), fixed.values.flat().end());
  fixed.source_min = *lo;
  fixed.source_max = *hi;
  const double range = fixed.source_max - fixed.source_min;
  for (double& v : fixed.values.flat()) {
    v = range > 0.0 ? (v - fixed.source_min) / range : 0.5;
  }
  return fixed;
}

FixedSpectrogram to_fixed(const Spectrogram& spec, std::size_t rows, std::size_t cols) {
  return to_fixed(spec.values, rows, cols);
}

}  // namespace sonoclass
