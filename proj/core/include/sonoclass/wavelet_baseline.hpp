#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sonoclass/matrix.hpp"

namespace sonoclass {

inline constexpr std::size_t kWaveletScales = 3;
inline constexpr std::size_t kWaveletOrientations = 3;  // horizontal, vertical, diagonal

// planes[j][k]: scale j + 1, orientation k. Used for the undecimated
// coefficients, their normalized magnitudes and the pooled C1 maps.
using WaveletPlanes = std::array<std::array<RealMatrix, kWaveletOrientations>, kWaveletScales>;

/// Undecimated (a trous) Haar transform with periodic extension.
///
/// At scale j the taps are spaced d = 2^(j-1) apart: lowpass
/// (a[n] + a[n+d]) / sqrt(2), highpass (a[n] - a[n+d]) / sqrt(2), applied
/// separably to the previous approximation (rows are the first index).
/// Horizontal = highpass along rows x lowpass along columns, vertical =
/// lowpass x highpass, diagonal = highpass x highpass. Every plane keeps the
/// input shape. Throws BadShape unless both dimensions are divisible by 8.
WaveletPlanes tiwt(const RealMatrix& spectrogram);

// |W| divided by the energy sum(W^2) of its own plane; zero-energy planes stay
// zero.
WaveletPlanes normalize_scale(const WaveletPlanes& coeffs);

// Max over non-overlapping cell x cell tiles. Throws BadShape when the plane
// is not divisible by cell.
RealMatrix local_max_plane(const RealMatrix& plane, std::size_t cell);

// Scale j planes pooled with 2^j cells.
WaveletPlanes local_max(const WaveletPlanes& normalized);

// tiwt -> normalize_scale -> local_max.
WaveletPlanes c1_maps(const RealMatrix& spectrogram);

struct Patch {
  std::size_t size = 0;    // M: the patch is M x M x 3
  std::size_t scale = 0;   // 0-based scale it was cut from
  std::size_t source = 0;  // index of the training map set
  std::size_t row = 0;
  std::size_t col = 0;
  std::array<RealMatrix, kWaveletOrientations> values;
};

struct PatchSet {
  std::vector<Patch> patches;
  std::uint64_t seed = 0;
};

inline constexpr std::array<std::size_t, 3> kDefaultPatchSizes{4, 8, 12};

/// Cuts n_patches patches from training C1 maps. Patch i has size
/// sizes[i % sizes.size()]; its source map set, scale and position are drawn
/// uniformly. Throws PatchLargerThanPlane when the drawn scale is too small
/// for the patch, EmptyInput for an empty training set.
PatchSet sample_patches(std::span<const WaveletPlanes> training_c1, std::size_t n_patches,
                        std::span<const std::size_t> sizes, std::uint64_t seed);

// per_patch[i][j]: sliding scalar products of patch i against the scale-j
// maps (summed over orientations) at every offset where the patch fits; an
// empty matrix when it does not fit at that scale.
struct S2Coeffs {
  std::vector<std::array<RealMatrix, kWaveletScales>> per_patch;
};

S2Coeffs patch_transform(const WaveletPlanes& c1, const PatchSet& patches);

// One maximum per patch over all offsets and scales. Throws EmptyInput if a
// patch has no valid offset at any scale.
std::vector<double> global_max(const S2Coeffs& s2);

// c1_maps -> patch_transform -> global_max without materializing S2.
std::vector<double> wavelet_features(const WaveletPlanes& c1, const PatchSet& patches);

}  // namespace sonoclass
