#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "../oracles/oracles.hpp"
#include "../support.hpp"
#include "sonoclass/error.hpp"
#include "sonoclass/wavelet_baseline.hpp"

using namespace sonoclass;
using testing_support::max_abs_diff;
using testing_support::random_matrix;

namespace {

WaveletPlanes planes_of(std::size_t n, std::uint64_t seed) {
  WaveletPlanes w;
  for (std::size_t j = 0; j < kWaveletScales; ++j) {
    for (std::size_t k = 0; k < kWaveletOrientations; ++k) w[j][k] = random_matrix(n, n, seed + 3 * j + k);
  }
  return w;
}

bool value_in(const RealMatrix& plane, std::size_t r0, std::size_t c0, const RealMatrix& patch) {
  for (std::size_t a = 0; a < patch.rows(); ++a) {
    for (std::size_t b = 0; b < patch.cols(); ++b) {
      if (plane(r0 + a, c0 + b) != patch(a, b)) return false;
    }
  }
  return true;
}

}  // namespace

TEST(Tiwt, ConstantInputHasNoDetail) {
  const WaveletPlanes w = tiwt(RealMatrix(32, 24, 0.7));
  for (const auto& scale : w) {
    for (const auto& plane : scale) {
      EXPECT_EQ(plane.rows(), 32u);
      EXPECT_EQ(plane.cols(), 24u);
      for (double v : plane.flat()) EXPECT_NEAR(v, 0.0, 1e-14);
    }
  }
}

TEST(Tiwt, UndecimatedShape) {
  const WaveletPlanes w = tiwt(random_matrix(128, 128, 1));
  for (const auto& scale : w) {
    for (const auto& plane : scale) {
      EXPECT_EQ(plane.rows(), 128u);
      EXPECT_EQ(plane.cols(), 128u);
    }
  }
}

TEST(Tiwt, RejectsShapesNotDivisibleByEight) {
  try {
    tiwt(RealMatrix(12, 16, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kBadShape);
  }
}

TEST(Tiwt, ImpulseMatchesDoubleSum) {
  RealMatrix s(8, 8, 0.0);
  s(0, 0) = 1.0;
  const WaveletPlanes w = tiwt(s);
  for (int k = 0; k < 3; ++k) {
    EXPECT_LE(max_abs_diff(w[0][static_cast<std::size_t>(k)], oracle::haar_detail_double_sum(s, 1, k)), 1e-10);
  }
}

TEST(Tiwt, RandomInputMatchesDoubleSumAtEveryScale) {
  const RealMatrix s = random_matrix(8, 16, 4, -1.0, 1.0);
  const WaveletPlanes w = tiwt(s);
  for (int j = 1; j <= 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      EXPECT_LE(max_abs_diff(w[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(k)],
                             oracle::haar_detail_double_sum(s, j, k)),
                1e-10)
          << "scale " << j << " orientation " << k;
    }
  }
}

TEST(Tiwt, CircularShiftCovariance) {
  const RealMatrix s = random_matrix(32, 32, 5);
  const std::size_t du = 5, dv = 11;
  RealMatrix shifted(32, 32);
  for (std::size_t r = 0; r < 32; ++r) {
    for (std::size_t c = 0; c < 32; ++c) shifted((r + du) % 32, (c + dv) % 32) = s(r, c);
  }
  const WaveletPlanes a = tiwt(s), b = tiwt(shifted);
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t r = 0; r < 32; ++r) {
        for (std::size_t c = 0; c < 32; ++c) {
          ASSERT_NEAR(b[j][k]((r + du) % 32, (c + dv) % 32), a[j][k](r, c), 1e-12);
        }
      }
    }
  }
}

TEST(NormalizeScale, Examples) {
  WaveletPlanes w;
  for (auto& scale : w) {
    for (auto& plane : scale) plane = RealMatrix(4, 4, 0.0);
  }
  w[0][0](0, 0) = 1.0;
  w[0][0](0, 1) = -1.0;
  const WaveletPlanes s1 = normalize_scale(w);
  EXPECT_EQ(s1[0][0](0, 0), 0.5);
  EXPECT_EQ(s1[0][0](0, 1), 0.5);
  EXPECT_EQ(s1[0][0](1, 1), 0.0);
  for (double v : s1[2][1].flat()) EXPECT_EQ(v, 0.0);
}

TEST(NormalizeScale, InverseHomogeneity) {
  const RealMatrix s = random_matrix(64, 64, 6);
  RealMatrix scaled = s;
  const double c = 3.5;
  for (double& v : scaled.flat()) v *= c;
  const WaveletPlanes a = normalize_scale(tiwt(s)), b = normalize_scale(tiwt(scaled));
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t i = 0; i < a[j][k].size(); ++i) {
        EXPECT_NEAR(b[j][k].flat()[i], a[j][k].flat()[i] / c, 1e-9 * a[j][k].flat()[i] / c + 1e-300);
      }
    }
  }
}

TEST(LocalMax, Examples) {
  EXPECT_EQ(local_max_plane(RealMatrix(8, 8, 0.25), 4), RealMatrix(2, 2, 0.25));
  RealMatrix m(4, 4, 0.0);
  m(0, 0) = 1;
  m(0, 1) = 2;
  m(1, 0) = 3;
  m(1, 1) = 4;
  const RealMatrix out = local_max_plane(m, 2);
  EXPECT_EQ(out.rows(), 2u);
  EXPECT_EQ(out(0, 0), 4.0);
  const WaveletPlanes c1 = c1_maps(random_matrix(128, 128, 2));
  EXPECT_EQ(c1[0][0].rows(), 64u);
  EXPECT_EQ(c1[1][1].rows(), 32u);
  EXPECT_EQ(c1[2][2].rows(), 16u);
  EXPECT_EQ(c1[2][2].cols(), 16u);
  EXPECT_THROW(local_max_plane(RealMatrix(6, 8, 0.0), 4), Error);
}

TEST(Patches, DeterministicAndVerbatim) {
  std::vector<WaveletPlanes> maps;
  for (std::uint64_t i = 0; i < 4; ++i) maps.push_back(c1_maps(random_matrix(128, 128, 20 + i)));
  const PatchSet a = sample_patches(maps, 30, kDefaultPatchSizes, 9);
  const PatchSet b = sample_patches(maps, 30, kDefaultPatchSizes, 9);
  ASSERT_EQ(a.patches.size(), 30u);
  EXPECT_EQ(a.seed, 9u);
  for (std::size_t i = 0; i < 30; ++i) {
    const Patch& p = a.patches[i];
    EXPECT_EQ(p.size, kDefaultPatchSizes[i % 3]);
    EXPECT_EQ(p.source, b.patches[i].source);
    EXPECT_EQ(p.row, b.patches[i].row);
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_EQ(p.values[k], b.patches[i].values[k]);
      EXPECT_EQ(p.values[k].rows(), p.size);
      EXPECT_TRUE(value_in(maps[p.source][p.scale][k], p.row, p.col, p.values[k]));
    }
  }
  const PatchSet one = sample_patches(maps, 1, std::vector<std::size_t>{4}, 1);
  ASSERT_EQ(one.patches.size(), 1u);
  EXPECT_EQ(one.patches[0].values[2].rows(), 4u);
}

TEST(Patches, Errors) {
  std::vector<WaveletPlanes> maps{c1_maps(random_matrix(64, 64, 1))};
  try {
    // Scale-3 maps of a 64x64 input are 8x8.
    sample_patches(maps, 50, std::vector<std::size_t>{12}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kPatchLargerThanPlane);
  }
  EXPECT_THROW(sample_patches({}, 5, kDefaultPatchSizes, 1), Error);
}

TEST(PatchTransform, MatchesTripleLoop) {
  const WaveletPlanes c1 = planes_of(6, 40);
  PatchSet set;
  Patch p;
  p.size = 4;
  for (std::size_t k = 0; k < 3; ++k) p.values[k] = random_matrix(4, 4, 70 + k, -1.0, 1.0);
  set.patches.push_back(p);
  const S2Coeffs s2 = patch_transform(c1, set);
  for (std::size_t j = 0; j < 3; ++j) {
    const std::vector<RealMatrix> maps{c1[j][0], c1[j][1], c1[j][2]};
    const std::vector<RealMatrix> patch{p.values[0], p.values[1], p.values[2]};
    const RealMatrix ref = oracle::s2_triple_loop(maps, patch);
    ASSERT_EQ(s2.per_patch[0][j].rows(), 3u);
    EXPECT_LE(max_abs_diff(s2.per_patch[0][j], ref), 1e-10);
  }
}

TEST(PatchTransform, SelfCorrelationAndZero) {
  const WaveletPlanes c1 = planes_of(16, 3);
  PatchSet set;
  Patch p;
  p.size = 4;
  double norm = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    p.values[k] = RealMatrix(4, 4);
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = 0; b < 4; ++b) {
        p.values[k](a, b) = c1[1][k](5 + a, 7 + b);
        norm += p.values[k](a, b) * p.values[k](a, b);
      }
    }
  }
  set.patches.push_back(p);
  EXPECT_NEAR(patch_transform(c1, set).per_patch[0][1](5, 7), norm, 1e-12);

  WaveletPlanes zero;
  for (auto& scale : zero) {
    for (auto& plane : scale) plane = RealMatrix(16, 16, 0.0);
  }
  const S2Coeffs zero_s2 = patch_transform(zero, set);
  for (const auto& m : zero_s2.per_patch[0]) {
    for (double v : m.flat()) EXPECT_EQ(v, 0.0);
  }
  EXPECT_EQ(global_max(patch_transform(zero, set)), std::vector<double>{0.0});
}

TEST(GlobalMax, DominatesAndMatchesFusedPath) {
  std::vector<WaveletPlanes> maps;
  for (std::uint64_t i = 0; i < 3; ++i) maps.push_back(c1_maps(random_matrix(128, 128, 50 + i)));
  const PatchSet set = sample_patches(maps, 200, kDefaultPatchSizes, 4);
  const WaveletPlanes probe = c1_maps(random_matrix(128, 128, 99));
  const S2Coeffs s2 = patch_transform(probe, set);
  const auto c2 = global_max(s2);
  ASSERT_EQ(c2.size(), 200u);
  for (std::size_t i = 0; i < c2.size(); ++i) {
    for (const auto& m : s2.per_patch[i]) {
      for (double v : m.flat()) EXPECT_GE(c2[i], v);
    }
  }
  EXPECT_EQ(wavelet_features(probe, set), c2);
}

TEST(GlobalMax, PermutationInvariant) {
  S2Coeffs s2;
  std::array<RealMatrix, 3> per;
  per[0] = random_matrix(5, 5, 1);
  per[1] = random_matrix(3, 3, 2);
  per[2] = RealMatrix();
  s2.per_patch.push_back(per);
  const double before = global_max(s2)[0];
  Rng rng(3);
  auto flat = s2.per_patch[0][0].flat();
  std::vector<double> values(flat.begin(), flat.end());
  rng.shuffle(values);
  std::copy(values.begin(), values.end(), s2.per_patch[0][0].flat().begin());
  EXPECT_EQ(global_max(s2)[0], before);
  S2Coeffs empty;
  empty.per_patch.push_back({});
  EXPECT_THROW(global_max(empty), Error);
}
