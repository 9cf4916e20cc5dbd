#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "../oracles/oracles.hpp"
#include "../support.hpp"
#include "sonoclass/error.hpp"
#include "sonoclass/spectrogram.hpp"

using namespace sonoclass;

namespace {

std::vector<double> random_signal(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

}  // namespace

TEST(Stft, HammingWindowShape) {
  const auto w = hamming_window(256);
  ASSERT_EQ(w.size(), 256u);
  EXPECT_NEAR(w.front(), 0.08, 1e-15);
  EXPECT_NEAR(w.back(), 0.08, 1e-15);
  for (std::size_t i = 0; i < 256; ++i) {
    EXPECT_GT(w[i], 0.0);
    EXPECT_LE(w[i], 1.08);
    EXPECT_NEAR(w[i], w[255 - i], 1e-15);
    EXPECT_NEAR(w[i], 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / 255.0), 1e-15);
  }
}

TEST(Stft, FrameCountExamples) {
  StftParams p;
  EXPECT_EQ(frame_count(1000, p), 12u);
  EXPECT_EQ(frame_count(256, p), 1u);
  EXPECT_EQ(frame_count(319, p), 1u);
  EXPECT_EQ(frame_count(320, p), 2u);
  const auto f = stft(std::vector<double>(1000, 0.0), p);
  EXPECT_EQ(f.rows(), 129u);
  EXPECT_EQ(f.cols(), 12u);
}

TEST(Stft, ZeroClipGivesZeroTransform) {
  const auto f = stft(std::vector<double>(600, 0.0), StftParams{});
  for (const auto& v : f.flat()) EXPECT_EQ(std::abs(v), 0.0);
}

TEST(Stft, ShortClipRejected) {
  try {
    stft(std::vector<double>(255, 0.1), StftParams{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kClipTooShort);
  }
}

TEST(Stft, InvalidParamsRejected) {
  EXPECT_THROW((StftParams{256, 0, 1e-10}.validate()), Error);
  EXPECT_THROW((StftParams{256, 257, 1e-10}.validate()), Error);
  EXPECT_THROW((StftParams{256, 64, 0.0}.validate()), Error);
}

TEST(Stft, MatchesDirectDftPerFrame) {
  const StftParams p;
  const auto x = random_signal(700, 5);
  const auto f = stft(x, p);
  const auto w = hamming_window(p.frame_size);
  for (std::size_t col = 0; col < f.cols(); ++col) {
    std::vector<double> frame(p.frame_size);
    for (std::size_t n = 0; n < p.frame_size; ++n) frame[n] = x[col * p.hop + n] * w[n];
    const auto ref = oracle::direct_dft(frame);
    for (std::size_t k = 0; k < p.bins(); ++k) {
      EXPECT_NEAR(std::abs(f(k, col) - ref[k]), 0.0, 1e-9);
    }
  }
}

TEST(Stft, Linearity) {
  const StftParams p;
  const auto f = random_signal(1024, 1);
  const auto g = random_signal(1024, 2);
  std::vector<double> h(1024);
  const double a = 0.3, b = -1.7;
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = a * f[i] + b * g[i];
  const auto F = stft(f, p), G = stft(g, p), H = stft(h, p);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < H.size(); ++i) {
    num = std::max(num, std::abs(H.flat()[i] - (a * F.flat()[i] + b * G.flat()[i])));
    den = std::max(den, std::abs(H.flat()[i]));
  }
  EXPECT_LE(num / den, 1e-9);
}

TEST(Stft, HopShiftMovesColumns) {
  const StftParams p;
  const auto x = random_signal(2000, 3);
  const std::vector<double> shifted(x.begin() + static_cast<long>(p.hop), x.end());
  const auto a = stft(x, p), b = stft(shifted, p);
  for (std::size_t col = 0; col + 1 < a.cols() && col < b.cols(); ++col) {
    for (std::size_t k = 0; k < a.rows(); ++k) {
      EXPECT_NEAR(std::abs(a(k, col + 1) - b(k, col)), 0.0, 1e-9 * (1.0 + std::abs(a(k, col + 1))));
    }
  }
}

TEST(LogMagnitude, Examples) {
  ComplexMatrix ones(3, 4, std::complex<double>(0.0, 1.0));
  const auto from_ones = log_magnitude(ones, 1e-10);
  for (double v : from_ones.values.flat()) EXPECT_EQ(v, 0.0);
  ComplexMatrix zeros(3, 4, 0.0);
  const auto from_zeros = log_magnitude(zeros, 1e-10);
  for (double v : from_zeros.values.flat()) EXPECT_NEAR(v, -23.025850929940457, 1e-12);
  ComplexMatrix e(2, 2, std::numbers::e);
  const auto from_e = log_magnitude(e, 1e-10);
  for (double v : from_e.values.flat()) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(LogMagnitude, SpectrogramShapeAndBinWidth) {
  const AudioClip clip(random_signal(1000, 8), 8000);
  const Spectrogram s = compute_spectrogram(clip, StftParams{});
  EXPECT_EQ(s.values.rows(), 129u);
  EXPECT_EQ(s.values.cols(), 12u);
  EXPECT_DOUBLE_EQ(s.bin_hz, 8000.0 / 256.0);
  for (double v : s.values.flat()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Fixed, IdentityResizeIsMinMax) {
  const auto m = testing_support::random_matrix(128, 128, 4, -3.0, 5.0);
  const FixedSpectrogram f = to_fixed(m, 128, 128);
  const auto [lo, hi] = std::minmax_element(m.flat().begin(), m.flat().end());
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_NEAR(f.values.flat()[i], (m.flat()[i] - *lo) / (*hi - *lo), 1e-15);
  }
  EXPECT_EQ(f.source_min, *lo);
  EXPECT_EQ(f.source_max, *hi);
}

TEST(Fixed, ConstantInputGivesHalf) {
  const RealMatrix m(20, 30, -7.25);
  const auto fixed = to_fixed(m, 128, 128);
  for (double v : fixed.values.flat()) EXPECT_EQ(v, 0.5);
}

TEST(Fixed, DegenerateInputRejected) {
  try {
    to_fixed(RealMatrix(1, 30, 0.0), 128, 128);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kDegenerateInput);
  }
  EXPECT_THROW(to_fixed(RealMatrix(30, 1, 0.0), 128, 128), Error);
}

TEST(Fixed, BilinearMatchesScalarOracle) {
  const auto m = testing_support::random_matrix(129, 12, 77, -20.0, 3.0);
  const RealMatrix r = resize_bilinear(m, 128, 128);
  for (std::size_t i = 0; i < 128; ++i) {
    for (std::size_t j = 0; j < 128; ++j) {
      EXPECT_NEAR(r(i, j), oracle::bilinear_at(m, 128, 128, i, j), 1e-12);
    }
  }
  // Corner alignment: output corners are the input corners.
  EXPECT_EQ(r(0, 0), m(0, 0));
  EXPECT_NEAR(r(127, 127), m(128, 11), 1e-12);
  EXPECT_NEAR(r(0, 127), m(0, 11), 1e-12);
  EXPECT_NEAR(r(127, 0), m(128, 0), 1e-12);
  const FixedSpectrogram f = to_fixed(m, 128, 128);
  for (double v : f.values.flat()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}
