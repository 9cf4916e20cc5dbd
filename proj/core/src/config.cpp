#include "sonoclass/config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sonoclass/error.hpp"

namespace sonoclass {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view why) {
  throw Error(Errc::kConfig, fmt::format("{} = '{}': {}", key, value, why));
}

double to_double(std::string_view key, std::string_view value) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v)) {
    bad_value(key, value, "expected a finite number");
  }
  return v;
}

long long to_int(std::string_view key, std::string_view value) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    bad_value(key, value, "expected an integer");
  }
  return v;
}

std::size_t to_size(std::string_view key, std::string_view value) {
  const long long v = to_int(key, value);
  if (v < 0) bad_value(key, value, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "expected true or false");
}

std::vector<std::string_view> split_commas(std::string_view value) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = value.find(',', start);
    parts.push_back(trim(value.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

void to_range(std::string_view key, std::string_view value, int& lo, int& hi, int& step) {
  const auto parts = split_commas(value);
  if (parts.size() != 3) bad_value(key, value, "expected lo,hi,step");
  lo = static_cast<int>(to_int(key, parts[0]));
  hi = static_cast<int>(to_int(key, parts[1]));
  step = static_cast<int>(to_int(key, parts[2]));
  if (step <= 0 || hi < lo) bad_value(key, value, "need lo <= hi and step > 0");
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(items[i]);
    } else {
      out += std::to_string(items[i]);
    }
  }
  return out;
}

}  // namespace

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

std::string_view method_name(Method method) noexcept {
  switch (method) {
    case Method::kSingle: return "single";
    case Method::kBank: return "bank";
    case Method::kPatches: return "patches";
    case Method::kWavelet: return "wavelet";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
  for (Method m : {Method::kSingle, Method::kBank, Method::kPatches, Method::kWavelet}) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

void set_config_value(RunConfig& c, std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "method") {
    const auto m = parse_method(value);
    if (!m) bad_value(key, value, "expected single, bank, patches or wavelet");
    c.method = *m;
  } else if (key == "single.scale") {
    c.single_scale = to_size(key, value);
  } else if (key == "single.orientation") {
    c.single_orientation = to_size(key, value);
  } else if (key == "stft.frame_size") {
    c.stft.frame_size = to_size(key, value);
  } else if (key == "stft.hop") {
    c.stft.hop = to_size(key, value);
  } else if (key == "stft.log_floor") {
    c.stft.log_floor = to_double(key, value);
  } else if (key == "grid.rows") {
    c.grid_rows = to_size(key, value);
  } else if (key == "grid.cols") {
    c.grid_cols = to_size(key, value);
  } else if (key == "gabor.scales") {
    c.gabor.f0_per_scale = LogGaborParams::octave_frequencies(to_size(key, value));
  } else if (key == "gabor.f0") {
    std::vector<double> f0;
    for (auto part : split_commas(value)) f0.push_back(to_double(key, part));
    c.gabor.f0_per_scale = std::move(f0);
  } else if (key == "gabor.orientations") {
    c.gabor.n_orientations = to_size(key, value);
  } else if (key == "gabor.sigma_ratio") {
    c.gabor.sigma_ratio = to_double(key, value);
  } else if (key == "gabor.sigma_theta") {
    c.gabor.sigma_theta = to_double(key, value);
  } else if (key == "wavelet.patches") {
    c.wavelet_patches = to_size(key, value);
  } else if (key == "wavelet.sizes") {
    std::vector<std::size_t> sizes;
    for (auto part : split_commas(value)) sizes.push_back(to_size(key, part));
    c.wavelet_sizes = std::move(sizes);
  } else if (key == "mi.n_bins") {
    c.mi_bins = static_cast<int>(to_int(key, value));
  } else if (key == "mi.top_k") {
    c.mi_top_k = to_size(key, value);
  } else if (key == "svm.c") {
    c.svm.c = to_double(key, value);
  } else if (key == "svm.gamma") {
    c.svm.gamma = to_double(key, value);
  } else if (key == "svm.tol") {
    c.svm_tol = to_double(key, value);
  } else if (key == "svm.max_passes") {
    c.svm_max_passes = to_size(key, value);
  } else if (key == "svm.grid_search") {
    c.grid_search = to_bool(key, value);
  } else if (key == "cv.log2c") {
    to_range(key, value, c.log2c_lo, c.log2c_hi, c.log2c_step);
  } else if (key == "cv.log2g") {
    to_range(key, value, c.log2g_lo, c.log2g_hi, c.log2g_step);
  } else if (key == "cv.folds") {
    c.cv_folds = to_size(key, value);
  } else if (key == "split.train_fraction") {
    c.train_fraction = to_double(key, value);
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(to_int(key, value));
  } else if (key == "cache_dir") {
    c.cache_dir = std::filesystem::path(std::string(value));
  } else if (key == "threads") {
    c.threads = to_size(key, value);
  } else {
    throw Error(Errc::kConfig, fmt::format("unknown configuration key '{}'", key));
  }
}

void RunConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(Errc::kConfig, why); };
  try {
    stft.validate();
    gabor.validate();
    svm.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (grid_rows < 8 || grid_cols < 8) fail("grid must be at least 8x8");
  if (single_scale < 1 || single_scale > gabor.n_scales()) {
    fail(fmt::format("single.scale must lie in [1, {}]", gabor.n_scales()));
  }
  if (single_orientation < 1 || single_orientation > gabor.n_orientations) {
    fail(fmt::format("single.orientation must lie in [1, {}]", gabor.n_orientations));
  }
  if (method == Method::kPatches && grid_rows != kPatchGridRows) {
    fail("method patches requires grid.rows = 128");
  }
  if (method == Method::kWavelet && (grid_rows % 8 != 0 || grid_cols % 8 != 0)) {
    fail("method wavelet requires grid dimensions divisible by 8");
  }
  if (wavelet_patches == 0) fail("wavelet.patches must be positive");
  if (wavelet_sizes.empty()) fail("wavelet.sizes must not be empty");
  for (std::size_t s : wavelet_sizes) {
    if (s == 0) fail("wavelet patch sizes must be positive");
  }
  if (mi_bins < 2) fail("mi.n_bins must be >= 2");
  if (mi_top_k < 1) fail("mi.top_k must be >= 1");
  if (!(svm_tol > 0.0)) fail("svm.tol must be positive");
  if (svm_max_passes == 0) fail("svm.max_passes must be positive");
  if (cv_folds < 2) fail("cv.folds must be >= 2");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail("split.train_fraction must lie in (0, 1)");
}

std::vector<double> RunConfig::c_grid() const { return log2_grid(log2c_lo, log2c_hi, log2c_step); }
std::vector<double> RunConfig::gamma_grid() const {
  return log2_grid(log2g_lo, log2g_hi, log2g_step);
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::kConfig, fmt::format("line {}: expected key = value", line_no));
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (!seen.insert(std::string(key)).second) {
      throw Error(Errc::kConfig, fmt::format("line {}: duplicate key '{}'", line_no, key));
    }
    set_config_value(base, key, line.substr(eq + 1));
  }
  base.validate();
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kConfig, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string spectrogram_signature(const RunConfig& c) {
  return fmt::format("stft.frame_size = {}\nstft.hop = {}\nstft.log_floor = {}\ngrid.rows = {}\n"
                     "grid.cols = {}\n",
                     c.stft.frame_size, c.stft.hop, format_double(c.stft.log_floor), c.grid_rows,
                     c.grid_cols);
}

std::string feature_signature(const RunConfig& c) {
  std::string s = fmt::format("method = {}\n", method_name(c.method));
  s += spectrogram_signature(c);
  switch (c.method) {
    case Method::kSingle:
      s += fmt::format("single.scale = {}\nsingle.orientation = {}\n", c.single_scale,
                       c.single_orientation);
      [[fallthrough]];
    case Method::kBank:
    case Method::kPatches:
      s += fmt::format("gabor.f0 = {}\ngabor.orientations = {}\ngabor.sigma_ratio = {}\n"
                       "gabor.sigma_theta = {}\n",
                       join(c.gabor.f0_per_scale), c.gabor.n_orientations,
                       format_double(c.gabor.sigma_ratio), format_double(c.gabor.sigma_theta));
      break;
    case Method::kWavelet:
      s += fmt::format("wavelet.patches = {}\nwavelet.sizes = {}\n", c.wavelet_patches,
                       join(c.wavelet_sizes));
      break;
  }
  return s;
}

std::string to_config_text(const RunConfig& c, bool include_runtime) {
  std::string s;
  s += fmt::format("method = {}\n", method_name(c.method));
  s += fmt::format("single.scale = {}\nsingle.orientation = {}\n", c.single_scale, c.single_orientation);
  s += spectrogram_signature(c);
  s += fmt::format("gabor.f0 = {}\ngabor.orientations = {}\ngabor.sigma_ratio = {}\n"
                   "gabor.sigma_theta = {}\n",
                   join(c.gabor.f0_per_scale), c.gabor.n_orientations,
                   format_double(c.gabor.sigma_ratio), format_double(c.gabor.sigma_theta));
  s += fmt::format("wavelet.patches = {}\nwavelet.sizes = {}\n", c.wavelet_patches, join(c.wavelet_sizes));
  s += fmt::format("mi.n_bins = {}\nmi.top_k = {}\n", c.mi_bins, c.mi_top_k);
  s += fmt::format("svm.c = {}\nsvm.gamma = {}\nsvm.tol = {}\nsvm.max_passes = {}\n",
                   format_double(c.svm.c), format_double(c.svm.gamma), format_double(c.svm_tol),
                   c.svm_max_passes);
  s += fmt::format("svm.grid_search = {}\n", c.grid_search ? "true" : "false");
  s += fmt::format("cv.log2c = {},{},{}\ncv.log2g = {},{},{}\ncv.folds = {}\n", c.log2c_lo,
                   c.log2c_hi, c.log2c_step, c.log2g_lo, c.log2g_hi, c.log2g_step, c.cv_folds);
  s += fmt::format("split.train_fraction = {}\nseed = {}\n", format_double(c.train_fraction), c.seed);
  if (include_runtime) {
    s += fmt::format("cache_dir = {}\nthreads = {}\n", c.cache_dir.string(), c.threads);
  }
  return s;
}

}  // namespace sonoclass
