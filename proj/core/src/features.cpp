#include "sonoclass/features.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cstring>
#include <fstream>
#include <iterator>
#include <mutex>
#include <thread>

#include "sonoclass/audio_io.hpp"
#include "sonoclass/error.hpp"
#include "sonoclass/hash.hpp"
#include "sonoclass/parallel.hpp"
#include "sonoclass/rng.hpp"

namespace sonoclass {
namespace {

constexpr char kCacheMagic[8] = {'S', 'C', 'C', 'A', 'C', 'H', 'E', '1'};
constexpr std::uint64_t kPatchSalt = 0x70617463;  // "patc"

std::uint64_t hash_u64(std::uint64_t value, std::uint64_t state) {
  unsigned char bytes[8];
  std::memcpy(bytes, &value, 8);
  return fnv1a(std::span<const unsigned char>(bytes, 8), state);
}

std::uint64_t hash_doubles(std::span<const double> values, std::uint64_t state) {
  return fnv1a({reinterpret_cast<const unsigned char*>(values.data()), values.size() * sizeof(double)},
               state);
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Counters {
  std::atomic<std::size_t> spec_hits{0}, spec_misses{0}, feat_hits{0}, feat_misses{0};
  void add_to(ExtractionStats* stats) const {
    if (stats == nullptr) return;
    stats->spectrogram_hits += spec_hits;
    stats->spectrogram_misses += spec_misses;
    stats->feature_hits += feat_hits;
    stats->feature_misses += feat_misses;
  }
};

struct ClipSource {
  std::vector<unsigned char> bytes;
  std::uint64_t content_hash = 0;
};

ClipSource read_source(const DatasetManifest& manifest, std::size_t entry) {
  ClipSource src;
  src.bytes = read_bytes(manifest.resolve(manifest.entries.at(entry)));
  src.content_hash = fnv1a(std::span<const unsigned char>(src.bytes));
  return src;
}

FixedSpectrogram spectrogram_from_source(const ClipSource& src, const std::string& id,
                                         const RunConfig& config, const FeatureCache& cache,
                                         Counters& counters) {
  const std::uint64_t key = fnv1a(spectrogram_signature(config), src.content_hash);
  if (auto hit = cache.load("spec", key)) {
    if (hit->rows() == config.grid_rows + 1 && hit->cols() == config.grid_cols) {
      ++counters.spec_hits;
      FixedSpectrogram spec;
      spec.values = RealMatrix(config.grid_rows, config.grid_cols);
      std::copy_n(hit->flat().begin(), spec.values.size(), spec.values.flat().begin());
      spec.source_min = (*hit)(config.grid_rows, 0);
      spec.source_max = (*hit)(config.grid_rows, 1);
      return spec;
    }
  }
  ++counters.spec_misses;
  const AudioClip clip = decode_wav(std::span<const std::uint8_t>(src.bytes), id);
  FixedSpectrogram spec = clip_spectrogram(clip, config);
  if (cache.enabled()) {
    // Extra trailing row carries the pre-normalization range.
    RealMatrix packed(config.grid_rows + 1, config.grid_cols, 0.0);
    std::copy(spec.values.flat().begin(), spec.values.flat().end(), packed.flat().begin());
    packed(config.grid_rows, 0) = spec.source_min;
    packed(config.grid_rows, 1) = spec.source_max;
    cache.store("spec", key, packed);
  }
  return spec;
}

// Runs fn over each entry, collecting every failure before throwing.
template <typename Fn>
void for_each_entry(const DatasetManifest& manifest, std::span<const std::size_t> entries,
                    std::size_t threads, Fn&& fn) {
  std::vector<std::string> failures(entries.size());
  std::vector<Errc> codes(entries.size(), Errc::kIo);
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    try {
      fn(i);
    } catch (const Error& e) {
      failures[i] = e.what();
      codes[i] = e.code();
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  std::string report;
  std::size_t failed = 0;
  Errc first = Errc::kIo;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (failures[i].empty()) continue;
    if (failed == 0) first = codes[i];
    ++failed;
    report += fmt::format("\n  {}: {}", manifest.entries[entries[i]].path.string(), failures[i]);
  }
  if (failed > 0) {
    throw Error(first, fmt::format("{} of {} clips failed:{}", failed, entries.size(), report));
  }
}

}  // namespace

std::filesystem::path FeatureCache::entry_path(std::string_view stage, std::uint64_t key) const {
  return dir_ / std::string(stage) / (hex64(key) + ".bin");
}

std::optional<RealMatrix> FeatureCache::load(std::string_view stage, std::uint64_t key) const {
  if (!enabled()) return std::nullopt;
  std::ifstream in(entry_path(stage, key), std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  std::uint64_t stored_key = 0, rows = 0, cols = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&stored_key), 8);
  in.read(reinterpret_cast<char*>(&rows), 8);
  in.read(reinterpret_cast<char*>(&cols), 8);
  if (!in || std::memcmp(magic, kCacheMagic, 8) != 0 || stored_key != key ||
      rows * cols > (std::uint64_t{1} << 32)) {
    return std::nullopt;
  }
  RealMatrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.flat().data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!in) return std::nullopt;
  return m;
}

void FeatureCache::store(std::string_view stage, std::uint64_t key, const RealMatrix& value) const {
  if (!enabled()) return;
  const auto path = entry_path(stage, key);
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(Errc::kIo, "cannot create cache directory " + path.parent_path().string());
  const auto tmp = path.string() + "." +
                   hex64(std::hash<std::thread::id>{}(std::this_thread::get_id())) + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    const std::uint64_t rows = value.rows(), cols = value.cols();
    out.write(kCacheMagic, 8);
    out.write(reinterpret_cast<const char*>(&key), 8);
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&cols), 8);
    out.write(reinterpret_cast<const char*>(value.flat().data()),
              static_cast<std::streamsize>(value.size() * sizeof(double)));
    if (!out) throw Error(Errc::kIo, "cannot write cache entry " + tmp);
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::kIo, "cannot move cache entry into place: " + path.string());
}

GaborExtractor::GaborExtractor(const RunConfig& config) : config_(config) {
  switch (config.method) {
    case Method::kSingle:
    case Method::kBank:
      bank_.emplace(build_bank(config.grid_rows, config.grid_cols, config.gabor));
      break;
    case Method::kPatches:
      bands_.emplace(config.grid_rows, config.grid_cols, config.gabor);
      break;
    case Method::kWavelet:
      throw Error(Errc::kInvalidArgument, "the wavelet method has no log-Gabor extractor");
  }
}

std::vector<double> GaborExtractor::operator()(const FixedSpectrogram& spec) const {
  switch (config_.method) {
    case Method::kSingle:
      return method1_feature(spec, *bank_, config_.single_scale, config_.single_orientation);
    case Method::kBank:
      return method2_feature(spec, *bank_);
    case Method::kPatches:
      return method3_feature(spec, *bands_);
    case Method::kWavelet:
      break;
  }
  throw Error(Errc::kInvalidArgument, "the wavelet method has no log-Gabor extractor");
}

FixedSpectrogram clip_spectrogram(const AudioClip& clip, const RunConfig& config) {
  const AudioClip normalized = peak_normalize(clip);
  return to_fixed(compute_spectrogram(normalized, config.stft), config.grid_rows, config.grid_cols);
}

std::vector<std::string> feature_names(const RunConfig& config, std::size_t dims) {
  std::vector<std::string> names;
  names.reserve(dims);
  if (config.method == Method::kWavelet) {
    for (std::size_t p = 0; p < dims; ++p) names.push_back(fmt::format("c2_{}", p));
    return names;
  }
  for (std::size_t i = 0; i < dims; ++i) {
    names.push_back(fmt::format("r{}_c{}", i / config.grid_cols, i % config.grid_cols));
  }
  return names;
}

std::uint64_t patch_set_hash(const PatchSet& patches) {
  std::uint64_t h = hash_u64(patches.seed, kFnvOffset);
  for (const Patch& p : patches.patches) {
    h = hash_u64(p.size, h);
    h = hash_u64(p.scale, h);
    for (const RealMatrix& m : p.values) h = hash_doubles(m.flat(), h);
  }
  return h;
}

std::vector<FixedSpectrogram> load_spectrograms(const DatasetManifest& manifest,
                                                std::span<const std::size_t> entries,
                                                const RunConfig& config, ExtractionStats* stats) {
  const FeatureCache cache(config.cache_dir);
  Counters counters;
  std::vector<FixedSpectrogram> out(entries.size());
  for_each_entry(manifest, entries, config.threads, [&](std::size_t i) {
    const ClipSource src = read_source(manifest, entries[i]);
    out[i] = spectrogram_from_source(src, manifest.entries[entries[i]].path.string(), config, cache,
                                     counters);
  });
  counters.add_to(stats);
  return out;
}

PatchSet sample_training_patches(const DatasetManifest& manifest,
                                 std::span<const std::size_t> entries, const RunConfig& config,
                                 ExtractionStats* stats) {
  const auto specs = load_spectrograms(manifest, entries, config, stats);
  std::vector<WaveletPlanes> c1(specs.size());
  parallel_for(specs.size(), config.threads, [&](std::size_t i) { c1[i] = c1_maps(specs[i].values); });
  return sample_patches(c1, config.wavelet_patches, config.wavelet_sizes,
                        mix_seed(config.seed, kPatchSalt));
}

FeatureMatrix extract_rows(const DatasetManifest& manifest, std::span<const std::size_t> entries,
                           std::span<const std::string> classes, const RunConfig& config,
                           const PatchSet* patches, ExtractionStats* stats) {
  const bool wavelet = config.method == Method::kWavelet;
  if (wavelet && patches == nullptr) {
    throw Error(Errc::kInvalidArgument, "the wavelet method needs a patch set");
  }
  FeatureMatrix result;
  result.labels.reserve(entries.size());
  for (std::size_t e : entries) {
    const std::string& label = manifest.entries.at(e).label;
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) throw Error(Errc::kManifest, "unknown class label '" + label + "'");
    result.labels.push_back(static_cast<int>(it - classes.begin()));
  }

  std::uint64_t feature_key = fnv1a(feature_signature(config));
  if (wavelet) feature_key = hash_u64(patch_set_hash(*patches), feature_key);

  std::optional<GaborExtractor> gabor;
  if (!wavelet) gabor.emplace(config);
  const FeatureCache cache(config.cache_dir);
  Counters counters;
  std::vector<std::vector<double>> rows(entries.size());
  for_each_entry(manifest, entries, config.threads, [&](std::size_t i) {
    const ClipSource src = read_source(manifest, entries[i]);
    const std::uint64_t key = hash_u64(src.content_hash, feature_key);
    if (auto hit = cache.load("feat", key)) {
      ++counters.feat_hits;
      rows[i].assign(hit->flat().begin(), hit->flat().end());
      return;
    }
    ++counters.feat_misses;
    const FixedSpectrogram spec = spectrogram_from_source(
        src, manifest.entries[entries[i]].path.string(), config, cache, counters);
    rows[i] = wavelet ? wavelet_features(c1_maps(spec.values), *patches) : (*gabor)(spec);
    if (cache.enabled()) {
      RealMatrix packed(1, rows[i].size());
      std::copy(rows[i].begin(), rows[i].end(), packed.flat().begin());
      cache.store("feat", key, packed);
    }
  });
  counters.add_to(stats);

  const std::size_t dims = rows.empty() ? 0 : rows.front().size();
  result.values = RealMatrix(rows.size(), dims);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dims) throw Error(Errc::kShapeMismatch, "feature rows differ in length");
    std::copy(rows[i].begin(), rows[i].end(), result.values.row(i).begin());
  }
  result.feature_names = feature_names(config, dims);
  return result;
}

ExtractedFeatures extract_features(const DatasetManifest& manifest, const RunConfig& config) {
  config.validate();
  manifest.validate(true);
  ExtractedFeatures out;
  out.classes = manifest.classes();
  out.train_entries = manifest.indices(Split::kTrain);
  out.test_entries = manifest.indices(Split::kTest);
  if (config.method == Method::kWavelet) {
    out.patches = sample_training_patches(manifest, out.train_entries, config, &out.stats);
  }
  const PatchSet* patches = out.patches ? &*out.patches : nullptr;
  out.train = extract_rows(manifest, out.train_entries, out.classes, config, patches, &out.stats);
  out.test = extract_rows(manifest, out.test_entries, out.classes, config, patches, &out.stats);
  return out;
}

}  // namespace sonoclass
