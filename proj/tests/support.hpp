#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sonoclass/matrix.hpp"
#include "sonoclass/rng.hpp"

namespace testing_support {

// Builds a RIFF/WAVE byte stream around raw frame data.
inline std::vector<std::uint8_t> make_wav(std::uint16_t format, std::uint16_t channels,
                                          std::uint32_t rate, std::uint16_t bits,
                                          const std::vector<std::uint8_t>& data,
                                          bool extensible = false) {
  std::vector<std::uint8_t> out;
  auto put = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  };
  auto u16 = [&](std::uint16_t v) { put(&v, 2); };
  auto u32 = [&](std::uint32_t v) { put(&v, 4); };
  const std::uint32_t fmt_size = extensible ? 40 : 16;
  put("RIFF", 4);
  u32(static_cast<std::uint32_t>(4 + 8 + fmt_size + 8 + data.size()));
  put("WAVE", 4);
  put("fmt ", 4);
  u32(fmt_size);
  u16(extensible ? 0xFFFE : format);
  u16(channels);
  u32(rate);
  const std::uint16_t align = static_cast<std::uint16_t>(channels * bits / 8);
  u32(rate * align);
  u16(align);
  u16(bits);
  if (extensible) {
    u16(22);
    u16(bits);
    u32(0);
    u16(format);
    const std::uint8_t guid_tail[14] = {0x00, 0x00, 0x00, 0x00, 0x10, 0x00, 0x80,
                                        0x00, 0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71};
    put(guid_tail, 14);
  }
  put("data", 4);
  u32(static_cast<std::uint32_t>(data.size()));
  put(data.data(), data.size());
  return out;
}

template <typename T>
std::vector<std::uint8_t> raw_bytes(const std::vector<T>& values) {
  std::vector<std::uint8_t> out(values.size() * sizeof(T));
  std::memcpy(out.data(), values.data(), out.size());
  return out;
}

inline sonoclass::RealMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                           double lo = 0.0, double hi = 1.0) {
  sonoclass::Rng rng(seed);
  sonoclass::RealMatrix m(rows, cols);
  for (double& v : m.flat()) v = rng.uniform(lo, hi);
  return m;
}

inline double max_abs_diff(const sonoclass::RealMatrix& a, const sonoclass::RealMatrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.flat()[i] - b.flat()[i]));
  return worst;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("sonoclass_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
