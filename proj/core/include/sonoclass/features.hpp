#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sonoclass/config.hpp"
#include "sonoclass/feature_select.hpp"
#include "sonoclass/log_gabor.hpp"
#include "sonoclass/manifest.hpp"
#include "sonoclass/spectrogram.hpp"
#include "sonoclass/wavelet_baseline.hpp"

namespace sonoclass {

struct ExtractionStats {
  std::size_t spectrogram_hits = 0;
  std::size_t spectrogram_misses = 0;
  std::size_t feature_hits = 0;
  std::size_t feature_misses = 0;
};

// On-disk store of matrices keyed by a 64-bit hash, one file per entry under
// <dir>/<stage>/. A default-constructed cache is disabled.
class FeatureCache {
 public:
  FeatureCache() = default;
  explicit FeatureCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  bool enabled() const noexcept { return !dir_.empty(); }
  const std::filesystem::path& dir() const noexcept { return dir_; }

  // Missing, truncated or mismatching files read as a miss.
  std::optional<RealMatrix> load(std::string_view stage, std::uint64_t key) const;
  void store(std::string_view stage, std::uint64_t key, const RealMatrix& value) const;

 private:
  std::filesystem::path entry_path(std::string_view stage, std::uint64_t key) const;
  std::filesystem::path dir_;
};

// Filter banks built once per configuration for the log-Gabor methods.
class GaborExtractor {
 public:
  explicit GaborExtractor(const RunConfig& config);
  std::vector<double> operator()(const FixedSpectrogram& spec) const;

 private:
  RunConfig config_;
  std::optional<LogGaborBank> bank_;
  std::optional<BandBanks> bands_;
};

// load -> peak_normalize -> spectrogram -> fixed grid.
FixedSpectrogram clip_spectrogram(const AudioClip& clip, const RunConfig& config);

std::vector<std::string> feature_names(const RunConfig& config, std::size_t dims);
std::uint64_t patch_set_hash(const PatchSet& patches);

// Fixed spectrograms for the given manifest rows, in order.
std::vector<FixedSpectrogram> load_spectrograms(const DatasetManifest& manifest,
                                                std::span<const std::size_t> entries,
                                                const RunConfig& config,
                                                ExtractionStats* stats = nullptr);

// Wavelet patches sampled from the C1 maps of the given (training) rows.
PatchSet sample_training_patches(const DatasetManifest& manifest,
                                 std::span<const std::size_t> entries, const RunConfig& config,
                                 ExtractionStats* stats = nullptr);

// Feature rows for the given manifest rows, in order. Labels are indices
// into `classes`; a label missing from `classes` is a manifest error. The
// wavelet method needs `patches`. Every unreadable file is reported in one
// error after the whole batch has been attempted.
FeatureMatrix extract_rows(const DatasetManifest& manifest, std::span<const std::size_t> entries,
                           std::span<const std::string> classes, const RunConfig& config,
                           const PatchSet* patches = nullptr, ExtractionStats* stats = nullptr);

struct ExtractedFeatures {
  std::vector<std::string> classes;
  std::vector<std::size_t> train_entries;
  std::vector<std::size_t> test_entries;
  FeatureMatrix train;
  FeatureMatrix test;
  std::optional<PatchSet> patches;  // wavelet method only
  ExtractionStats stats;
};

// Train and test matrices for a fully split manifest.
ExtractedFeatures extract_features(const DatasetManifest& manifest, const RunConfig& config);

}  // namespace sonoclass
