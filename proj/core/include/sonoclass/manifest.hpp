#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sonoclass {

enum class Split { kUnassigned, kTrain, kTest };

std::string_view split_name(Split split) noexcept;

struct ManifestEntry {
  std::filesystem::path path;  // as written; relative paths resolve against base_dir
  std::string label;
  Split split = Split::kUnassigned;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const ManifestEntry& entry) const;
  // Sorted distinct labels.
  std::vector<std::string> classes() const;
  std::vector<std::size_t> indices(Split split) const;
  bool fully_split() const;
  // Distinct paths and non-empty labels; with require_splits, every entry
  // assigned and both splits non-empty. Throws Error(kManifest).
  void validate(bool require_splits) const;
  // Fingerprint of (path, label, split) membership.
  std::uint64_t split_hash() const;
};

// One record per line: path TAB label [TAB train|test]. Blank lines and lines
// starting with '#' are skipped.
DatasetManifest parse_manifest_tsv(std::string_view text,
                                   const std::filesystem::path& base_dir = {});
// {"entries": [{"path": ..., "label": ..., "split": ...}, ...]}
DatasetManifest parse_manifest_json(std::string_view text,
                                    const std::filesystem::path& base_dir = {});
// Picks the JSON reader for *.json, TSV otherwise.
DatasetManifest load_manifest(const std::filesystem::path& path);

std::string to_tsv(const DatasetManifest& manifest);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Stratified split: within each class (in manifest order, then shuffled by
/// the seed) the first ceil(train_fraction * n_c) entries go to train, the
/// rest to test. Entry order is preserved. Throws ClassTooSmall for classes
/// with fewer than 3 entries.
DatasetManifest auto_split(DatasetManifest manifest, double train_fraction, std::uint64_t seed);

std::size_t train_count(std::size_t class_size, double train_fraction);

}  // namespace sonoclass
