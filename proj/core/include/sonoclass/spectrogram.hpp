#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sonoclass/audio_io.hpp"
#include "sonoclass/matrix.hpp"

namespace sonoclass {

struct StftParams {
  std::size_t frame_size = 256;
  std::size_t hop = 64;  // 192-sample overlap at the default frame size
  double log_floor = 1e-10;

  std::size_t bins() const noexcept { return frame_size / 2 + 1; }
  // Throws InvalidArgument unless 0 < hop <= frame_size, frame_size >= 2
  // and log_floor > 0.
  void validate() const;
};

// Symmetric Hamming window 0.54 - 0.46 cos(2 pi n / (N - 1)).
std::vector<double> hamming_window(std::size_t n);

// Number of whole frames in n samples; trailing partial frames are dropped.
std::size_t frame_count(std::size_t n_samples, const StftParams& params);

/// One-sided short-time Fourier transform.
///
/// Entry (y, x) is sum_n f[n + x*hop] w[n] exp(-2 pi i y n / frame_size)
/// for y in [0, frame_size/2]. Rows are frequency bins (row 0 is DC), columns
/// are frames. Throws ClipTooShort when fewer than frame_size samples exist.
ComplexMatrix stft(std::span<const double> samples, const StftParams& params);
ComplexMatrix stft(const AudioClip& clip, const StftParams& params);

struct Spectrogram {
  RealMatrix values;    // natural-log magnitude, rows = bins, cols = frames
  double bin_hz = 0.0;  // sample_rate / frame_size, 0 when unknown
  StftParams params;
};

// ln(max(|F|, log_floor)) elementwise.
Spectrogram log_magnitude(const ComplexMatrix& transform, double log_floor);

// stft followed by log_magnitude, with bin_hz filled in from the clip.
Spectrogram compute_spectrogram(const AudioClip& clip, const StftParams& params);

struct FixedSpectrogram {
  RealMatrix values;  // in [0, 1]
  double source_min = 0.0;
  double source_max = 0.0;
};

// Corner-aligned bilinear resampling: output (i, j) samples the input at
// (i (R_in - 1)/(R_out - 1), j (C_in - 1)/(C_out - 1)). Requires at least two
// input rows and columns (DegenerateInput) and two output rows and columns.
RealMatrix resize_bilinear(const RealMatrix& in, std::size_t rows, std::size_t cols);

// Bilinear resize then min-max normalization to [0, 1]; a constant input
// maps to 0.5 everywhere.
FixedSpectrogram to_fixed(const RealMatrix& values, std::size_t rows, std::size_t cols);
FixedSpectrogram to_fixed(const Spectrogram& spec, std::size_t rows, std::size_t cols);

}  // namespace sonoclass
