#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sonoclass/log_gabor.hpp"
#include "sonoclass/spectrogram.hpp"
#include "sonoclass/svm.hpp"

namespace sonoclass {

enum class Method { kSingle, kBank, kPatches, kWavelet };

std::string_view method_name(Method method) noexcept;
std::optional<Method> parse_method(std::string_view name) noexcept;

struct RunConfig {
  Method method = Method::kBank;
  std::size_t single_scale = 1;        // 1-based
  std::size_t single_orientation = 1;  // 1-based

  StftParams stft;
  std::size_t grid_rows = 128;
  std::size_t grid_cols = 128;
  LogGaborParams gabor;

  std::size_t wavelet_patches = 200;
  std::vector<std::size_t> wavelet_sizes{4, 8, 12};

  int mi_bins = 16;
  std::size_t mi_top_k = 256;

  KernelParams svm{0.125, 8.0};
  double svm_tol = 1e-3;
  std::size_t svm_max_passes = 1000;
  bool grid_search = false;
  int log2c_lo = -5, log2c_hi = 15, log2c_step = 2;
  int log2g_lo = -15, log2g_hi = 3, log2g_step = 2;
  std::size_t cv_folds = 5;

  double train_fraction = 2.0 / 3.0;
  std::uint64_t seed = 1;
  std::filesystem::path cache_dir;  // empty disables the on-disk cache
  std::size_t threads = 0;          // 0 = hardware concurrency

  // Checks every field against its module's preconditions (Errc::kConfig).
  void validate() const;

  std::vector<double> c_grid() const;
  std::vector<double> gamma_grid() const;
};

// Flat "key = value" text; '#' starts a comment. Unknown keys, malformed
// values and duplicate keys are errors (Errc::kConfig). Keys not given keep
// their defaults.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

// Applies one key/value pair (used by the parser and CLI overrides).
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);

// Canonical text for every key, in a fixed order; parse_config of the result
// reproduces the configuration. Doubles use 17 significant digits.
std::string to_config_text(const RunConfig& config, bool include_runtime = false);

// Canonical text of the fields that determine the fixed spectrogram, and of
// the fields that determine the feature vector.
std::string spectrogram_signature(const RunConfig& config);
std::string feature_signature(const RunConfig& config);

std::string format_double(double value);

}  // namespace sonoclass
