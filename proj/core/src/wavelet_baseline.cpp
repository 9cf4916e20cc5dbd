#include "sonoclass/wavelet_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sonoclass/error.hpp"
#include "sonoclass/rng.hpp"

namespace sonoclass {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

enum class Tap { kLow, kHigh };

// Periodic two-tap filter along rows (axis 0) or columns (axis 1).
RealMatrix filter_axis(const RealMatrix& in, int axis, std::size_t spacing, Tap tap) {
  RealMatrix out(in.rows(), in.cols());
  const double sign = tap == Tap::kLow ? 1.0 : -1.0;
  for (std::size_t r = 0; r < in.rows(); ++r) {
    for (std::size_t c = 0; c < in.cols(); ++c) {
      const double a = in(r, c);
      const double b = axis == 0 ? in((r + spacing) % in.rows(), c)
                                 : in(r, (c + spacing) % in.cols());
      out(r, c) = (a + sign * b) * kInvSqrt2;
    }
  }
  return out;
}

}  // namespace

WaveletPlanes tiwt(const RealMatrix& spectrogram) {
  constexpr std::size_t kDivisor = std::size_t{1} << kWaveletScales;
  if (spectrogram.rows() == 0 || spectrogram.rows() % kDivisor != 0 ||
      spectrogram.cols() == 0 || spectrogram.cols() % kDivisor != 0) {
    throw Error(Errc::kBadShape, "wavelet input must have dimensions divisible by 8, got " +
                                     std::to_string(spectrogram.rows()) + "x" +
                                     std::to_string(spectrogram.cols()));
  }
  WaveletPlanes w;
  RealMatrix approx = spectrogram;
  for (std::size_t j = 0; j < kWaveletScales; ++j) {
    const std::size_t d = std::size_t{1} << j;
    const RealMatrix row_low = filter_axis(approx, 0, d, Tap::kLow);
    const RealMatrix row_high = filter_axis(approx, 0, d, Tap::kHigh);
    w[j][0] = filter_axis(row_high, 1, d, Tap::kLow);
    w[j][1] = filter_axis(row_low, 1, d, Tap::kHigh);
    w[j][2] = filter_axis(row_high, 1, d, Tap::kHigh);
    approx = filter_axis(row_low, 1, d, Tap::kLow);
  }
  return w;
}

WaveletPlanes normalize_scale(const WaveletPlanes& coeffs) {
  WaveletPlanes out;
  for (std::size_t j = 0; j < kWaveletScales; ++j) {
    for (std::size_t k = 0; k < kWaveletOrientations; ++k) {
      const RealMatrix& plane = coeffs[j][k];
      double energy = 0.0;
      for (double v : plane.flat()) energy += v * v;
      RealMatrix s1(plane.rows(), plane.cols(), 0.0);
      if (energy > 0.0) {
        const auto src = plane.flat();
        auto dst = s1.flat();
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::abs(src[i]) / energy;
      }
      out[j][k] = std::move(s1);
    }
  }
  return out;
}

RealMatrix local_max_plane(const RealMatrix& plane, std::size_t cell) {
  if (cell == 0 || plane.rows() % cell != 0 || plane.cols() % cell != 0 || plane.empty()) {
    throw Error(Errc::kBadShape, "plane is not divisible into " + std::to_string(cell) + "x" +
                                     std::to_string(cell) + " cells");
  }
  RealMatrix out(plane.rows() / cell, plane.cols() / cell,
                 -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < plane.rows(); ++r) {
    for (std::size_t c = 0; c < plane.cols(); ++c) {
      double& m = out(r / cell, c / cell);
      m = std::max(m, plane(r, c));
    }
  }
  return out;
}

WaveletPlanes local_max(const WaveletPlanes& normalized) {
  WaveletPlanes out;
  for (std::size_t j = 0; j < kWaveletScales; ++j) {
    for (std::size_t k = 0; k < kWaveletOrientations; ++k) {
      out[j][k] = local_max_plane(normalized[j][k], std::size_t{2} << j);
    }
  }
  return out;
}

WaveletPlanes c1_maps(const RealMatrix& spectrogram) {
  return local_max(normalize_scale(tiwt(spectrogram)));
}

PatchSet sample_patches(std::span<const WaveletPlanes> training_c1, std::size_t n_patches,
                        std::span<const std::size_t> sizes, std::uint64_t seed) {
  if (training_c1.empty()) throw Error(Errc::kEmptyInput, "no training maps to sample from");
  if (n_patches == 0 || sizes.empty()) {
    throw Error(Errc::kInvalidArgument, "need at least one patch and one patch size");
  }
  Rng rng(seed);
  PatchSet set;
  set.seed = seed;
  set.patches.reserve(n_patches);
  for (std::size_t i = 0; i < n_patches; ++i) {
    Patch p;
    p.size = sizes[i % sizes.size()];
    if (p.size == 0) throw Error(Errc::kInvalidArgument, "patch size must be positive");
    p.source = static_cast<std::size_t>(rng.uniform_index(training_c1.size()));
    p.scale = static_cast<std::size_t>(rng.uniform_index(kWaveletScales));
    const auto& maps = training_c1[p.source][p.scale];
    const std::size_t rows = maps[0].rows();
    const std::size_t cols = maps[0].cols();
    if (p.size > rows || p.size > cols) {
      throw Error(Errc::kPatchLargerThanPlane,
                  std::to_string(p.size) + "x" + std::to_string(p.size) + " patch exceeds " +
                      std::to_string(rows) + "x" + std::to_string(cols) + " map at scale " +
                      std::to_string(p.scale + 1));
    }
    p.row = static_cast<std::size_t>(rng.uniform_index(rows - p.size + 1));
    p.col = static_cast<std::size_t>(rng.uniform_index(cols - p.size + 1));
    for (std::size_t k = 0; k < kWaveletOrientations; ++k) {
      RealMatrix v(p.size, p.size);
      for (std::size_t a = 0; a < p.size; ++a) {
        for (std::size_t b = 0; b < p.size; ++b) v(a, b) = maps[k](p.row + a, p.col + b);
      }
      p.values[k] = std::move(v);
    }
    set.patches.push_back(std::move(p));
  }
  return set;
}

namespace {

// Sliding correlation of one patch against one scale's orientation maps.
RealMatrix correlate(const std::array<RealMatrix, kWaveletOrientations>& maps, const Patch& p) {
  const std::size_t rows = maps[0].rows();
  const std::size_t cols = maps[0].cols();
  if (p.size > rows || p.size > cols) return {};
  const std::size_t out_rows = rows - p.size + 1;
  const std::size_t out_cols = cols - p.size + 1;
  RealMatrix out(out_rows, out_cols, 0.0);
  for (std::size_t k = 0; k < kWaveletOrientations; ++k) {
    const RealMatrix& map = maps[k];
    const RealMatrix& patch = p.values[k];
    for (std::size_t a = 0; a < p.size; ++a) {
      const auto prow = patch.row(a);
      for (std::size_t u = 0; u < out_rows; ++u) {
        const auto mrow = map.row(u + a);
        auto orow = out.row(u);
        for (std::size_t b = 0; b < p.size; ++b) {
          const double w = prow[b];
          const double* src = mrow.data() + b;
          for (std::size_t v = 0; v < out_cols; ++v) orow[v] += w * src[v];
        }
      }
    }
  }
  return out;
}

}  // namespace

S2Coeffs patch_transform(const WaveletPlanes& c1, const PatchSet& patches) {
  S2Coeffs s2;
  s2.per_patch.reserve(patches.patches.size());
  for (const Patch& p : patches.patches) {
    std::array<RealMatrix, kWaveletScales> per_scale;
    for (std::size_t j = 0; j < kWaveletScales; ++j) per_scale[j] = correlate(c1[j], p);
    s2.per_patch.push_back(std::move(per_scale));
  }
  return s2;
}

std::vector<double> global_max(const S2Coeffs& s2) {
  std::vector<double> c2;
  c2.reserve(s2.per_patch.size());
  for (std::size_t i = 0; i < s2.per_patch.size(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (const RealMatrix& m : s2.per_patch[i]) {
      for (double v : m.flat()) {
        best = std::max(best, v);
        any = true;
      }
    }
    if (!any) {
      throw Error(Errc::kEmptyInput, "patch " + std::to_string(i) + " fits no scale");
    }
    c2.push_back(best);
  }
  return c2;
}

std::vector<double> wavelet_features(const WaveletPlanes& c1, const PatchSet& patches) {
  std::vector<double> c2;
  c2.reserve(patches.patches.size());
  for (std::size_t i = 0; i < patches.patches.size(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < kWaveletScales; ++j) {
      const RealMatrix s2 = correlate(c1[j], patches.patches[i]);
      for (double v : s2.flat()) {
        best = std::max(best, v);
        any = true;
      }
    }
    if (!any) throw Error(Errc::kEmptyInput, "patch " + std::to_string(i) + " fits no scale");
    c2.push_back(best);
  }
  return c2;
}

}  // namespace sonoclass
