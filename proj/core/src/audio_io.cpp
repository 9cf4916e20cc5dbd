#include "sonoclass/audio_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>

#include "sonoclass/error.hpp"
#include "sonoclass/rng.hpp"

namespace sonoclass {

AudioClip::AudioClip(std::vector<double> samples, int sample_rate,
                     std::string source_id)
    : samples_(std::move(samples)),
      sample_rate_(sample_rate),
      source_id_(std::move(source_id)) {
  if (samples_.empty()) throw Error(Errc::kEmptyAudio, "clip has no samples");
  if (sample_rate_ <= 0) {
    throw Error(Errc::kInvalidArgument, "sample rate must be positive");
  }
  for (double s : samples_) {
    if (!std::isfinite(s) || s < -1.0 || s > 1.0) {
      throw Error(Errc::kInvalidArgument,
                  "sample outside [-1, 1] in clip '" + source_id_ + "'");
    }
  }
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::string tag() {
    need(4);
    std::string t(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return t;
  }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

 private:
  void need(std::size_t n) const {
    if (!has(n)) throw Error(Errc::kMalformedContainer, "truncated WAV data");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

struct WavFormat {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

double decode_sample(const std::uint8_t* p, const WavFormat& fmt) {
  if (fmt.format == kFormatFloat) {
    std::uint32_t raw = static_cast<std::uint32_t>(p[0]) |
                        (static_cast<std::uint32_t>(p[1]) << 8) |
                        (static_cast<std::uint32_t>(p[2]) << 16) |
                        (static_cast<std::uint32_t>(p[3]) << 24);
    float f;
    std::memcpy(&f, &raw, sizeof f);
    const double v = static_cast<double>(f);
    if (!std::isfinite(v)) {
      throw Error(Errc::kMalformedContainer, "non-finite float sample");
    }
    return std::clamp(v, -1.0, 1.0);
  }
  switch (fmt.bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16: {
      const auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      return v / 32768.0;
    }
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default: {
      const auto v = static_cast<std::int32_t>(
          static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
          (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24));
      return v / 2147483648.0;
    }
  }
}

void check_format(WavFormat& fmt) {
  if (fmt.format != kFormatPcm && fmt.format != kFormatFloat) {
    throw Error(Errc::kUnsupportedEncoding,
                "WAV format tag " + std::to_string(fmt.format) + " is not PCM or float");
  }
  if (fmt.channels != 1 && fmt.channels != 2) {
    throw Error(Errc::kUnsupportedEncoding,
                std::to_string(fmt.channels) + " channels (mono or stereo expected)");
  }
  const bool int_ok = fmt.format == kFormatPcm &&
                      (fmt.bits == 8 || fmt.bits == 16 || fmt.bits == 24 || fmt.bits == 32);
  const bool float_ok = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!int_ok && !float_ok) {
    throw Error(Errc::kUnsupportedEncoding,
                std::to_string(fmt.bits) + "-bit samples are not supported");
  }
  if (fmt.sample_rate == 0) {
    throw Error(Errc::kMalformedContainer, "zero sample rate");
  }
  if (fmt.block_align != fmt.channels * (fmt.bits / 8)) {
    throw Error(Errc::kMalformedContainer, "inconsistent block alignment");
  }
}

}  // namespace

AudioClip decode_wav(std::span<const std::uint8_t> bytes, std::string source_id) {
  ByteReader in(bytes);
  if (!in.has(12)) throw Error(Errc::kMalformedContainer, "file too short for RIFF header");
  if (in.tag() != "RIFF") throw Error(Errc::kMalformedContainer, "missing RIFF tag");
  in.u32();  // riff size; unreliable in the wild
  if (in.tag() != "WAVE") throw Error(Errc::kMalformedContainer, "missing WAVE tag");

  std::optional<WavFormat> fmt;
  std::span<const std::uint8_t> data;
  bool have_data = false;
  while (in.has(8)) {
    const std::string id = in.tag();
    const std::uint32_t size = in.u32();
    if (id == "fmt ") {
      if (size < 16 || !in.has(size)) {
        throw Error(Errc::kMalformedContainer, "bad fmt chunk");
      }
      const std::size_t start = in.pos();
      WavFormat f;
      f.format = in.u16();
      f.channels = in.u16();
      f.sample_rate = in.u32();
      in.u32();  // byte rate
      f.block_align = in.u16();
      f.bits = in.u16();
      if (f.format == kFormatExtensible) {
        if (size < 40) throw Error(Errc::kMalformedContainer, "short extensible fmt chunk");
        in.u16();  // cbSize
        in.u16();  // valid bits
        in.u32();  // channel mask
        f.format = in.u16();  // leading two bytes of the subformat GUID
      }
      in.skip(size - (in.pos() - start));
      fmt = f;
    } else if (id == "data") {
      if (!fmt) throw Error(Errc::kMalformedContainer, "data chunk before fmt chunk");
      if (!in.has(size)) throw Error(Errc::kMalformedContainer, "truncated data chunk");
      data = bytes.subspan(in.pos(), size);
      have_data = true;
      break;
    } else {
      if (!in.has(size)) throw Error(Errc::kMalformedContainer, "truncated chunk " + id);
      in.skip(size);
    }
    if ((size & 1U) && in.has(1)) in.skip(1);  // RIFF word alignment
  }
  if (!fmt) throw Error(Errc::kMalformedContainer, "missing fmt chunk");
  if (!have_data) throw Error(Errc::kMalformedContainer, "missing data chunk");
  check_format(*fmt);

  const std::size_t frames = data.size() / fmt->block_align;
  if (frames == 0) throw Error(Errc::kEmptyAudio, "WAV has zero frames");
  const std::size_t width = fmt->bits / 8;
  std::vector<double> samples(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const std::uint8_t* frame = data.data() + i * fmt->block_align;
    if (fmt->channels == 1) {
      samples[i] = decode_sample(frame, *fmt);
    } else {
      samples[i] = 0.5 * (decode_sample(frame, *fmt) + decode_sample(frame + width, *fmt));
    }
  }
  return AudioClip(std::move(samples), static_cast<int>(fmt->sample_rate),
                   std::move(source_id));
}

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes, path.string());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav16(const AudioClip& clip) {
  const auto n = static_cast<std::uint32_t>(clip.size());
  const std::uint32_t data_bytes = n * 2;
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  auto put_tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
  auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  auto put16 = [&](std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  };
  const auto rate = static_cast<std::uint32_t>(clip.sample_rate());
  put_tag("RIFF");
  put32(36 + data_bytes);
  put_tag("WAVE");
  put_tag("fmt ");
  put32(16);
  put16(kFormatPcm);
  put16(1);
  put32(rate);
  put32(rate * 2);
  put16(2);
  put16(16);
  put_tag("data");
  put32(data_bytes);
  for (double s : clip.samples()) {
    const double scaled = std::round(s * 32767.0);
    put16(static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  return out;
}

void save_wav16(const AudioClip& clip, const std::filesystem::path& path) {
  const auto bytes = encode_wav16(clip);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::kIo, "short write to " + path.string());
}

AudioClip peak_normalize(const AudioClip& clip) {
  double peak = 0.0;
  for (double s : clip.samples()) peak = std::max(peak, std::abs(s));
  if (peak == 0.0) return clip;
  std::vector<double> out(clip.samples().begin(), clip.samples().end());
  // Division (not multiplication by 1/peak) makes the peak sample exactly
  // +/-1, so a second pass is an exact no-op.
  for (double& s : out) s /= peak;
  return AudioClip(std::move(out), clip.sample_rate(), clip.source_id());
}

std::string_view synth_kind_name(SynthKind kind) noexcept {
  switch (kind) {
    case SynthKind::kNoiseBurst: return "noise_burst";
    case SynthKind::kHarmonicTone: return "harmonic_tone";
    case SynthKind::kChirp: return "chirp";
    case SynthKind::kImpulseTrain: return "impulse_train";
  }
  return "unknown";
}

std::optional<SynthKind> parse_synth_kind(std::string_view name) noexcept {
  for (SynthKind k : kAllSynthKinds) {
    if (synth_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

SynthRecipe synth_recipe(SynthKind kind, double duration_s, int sample_rate,
                         std::uint64_t seed) {
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
    throw Error(Errc::kInvalidDuration, "duration must be positive");
  }
  if (sample_rate <= 0) throw Error(Errc::kInvalidArgument, "sample rate must be positive");
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(kind)));
  const double nyquist_guard = 0.45 * sample_rate;
  SynthRecipe r{kind};
  switch (kind) {
    case SynthKind::kNoiseBurst:
      r.offset_s = rng.uniform(0.0, 0.3) * duration_s;
      r.attack_s = rng.uniform(0.005, 0.02);
      r.decay_s = rng.uniform(0.05, 0.3);
      break;
    case SynthKind::kHarmonicTone:
      r.fundamental_hz = std::min(rng.uniform(200.0, 800.0), nyquist_guard / 3.0);
      break;
    case SynthKind::kChirp:
      r.sweep_start_hz = std::min(rng.uniform(300.0, 3000.0), nyquist_guard);
      r.sweep_end_hz = std::min(rng.uniform(5000.0, 15000.0), nyquist_guard);
      break;
    case SynthKind::kImpulseTrain:
      r.period_s = rng.uniform(0.05, 0.2);
      r.offset_s = rng.uniform(0.0, r.period_s);
      break;
  }
  return r;
}

AudioClip synthesize_clip(SynthKind kind, double duration_s, int sample_rate,
                          std::uint64_t seed) {
  const SynthRecipe recipe = synth_recipe(kind, duration_s, sample_rate, seed);
  const auto n = static_cast<std::size_t>(std::floor(duration_s * sample_rate));
  if (n == 0) throw Error(Errc::kInvalidDuration, "duration shorter than one sample");
  const double rate = sample_rate;
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> x(n, 0.0);
  Rng rng(mix_seed(seed, 100 + static_cast<std::uint64_t>(kind)));

  switch (kind) {
    case SynthKind::kNoiseBurst: {
      for (std::size_t i = 0; i < n; ++i) {
        const double t = i / rate - recipe.offset_s;
        double env = 0.0;
        if (t >= 0.0) {
          env = t < recipe.attack_s ? t / recipe.attack_s
                                    : std::exp(-(t - recipe.attack_s) / recipe.decay_s);
        }
        x[i] = env * rng.normal();
      }
      break;
    }
    case SynthKind::kHarmonicTone: {
      const std::array<double, 3> amps{1.0, 0.5, 1.0 / 3.0};
      std::array<double, 3> phases{};
      for (double& p : phases) p = rng.uniform(0.0, two_pi);
      const double fade = std::min(0.01, duration_s / 4.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = i / rate;
        double v = 0.0;
        for (std::size_t h = 0; h < 3; ++h) {
          v += amps[h] * std::sin(two_pi * recipe.fundamental_hz * static_cast<double>(h + 1) * t +
                                  phases[h]);
        }
        double env = 1.0;
        if (t < fade) env = t / fade;
        if (duration_s - t < fade) env = std::min(env, (duration_s - t) / fade);
        x[i] = env * v;
      }
      break;
    }
    case SynthKind::kChirp: {
      const double slope = (recipe.sweep_end_hz - recipe.sweep_start_hz) / duration_s;
      const double phase0 = rng.uniform(0.0, two_pi);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = i / rate;
        x[i] = std::sin(phase0 + two_pi * (recipe.sweep_start_hz * t + 0.5 * slope * t * t));
      }
      break;
    }
    case SynthKind::kImpulseTrain: {
      for (double t = recipe.offset_s; t < duration_s; t += recipe.period_s) {
        const auto i = static_cast<std::size_t>(std::llround(t * rate));
        if (i < n) x[i] = 1.0;
      }
      break;
    }
  }

  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : x) v /= peak;
  }
  std::string id = std::string(synth_kind_name(kind)) + "#" + std::to_string(seed);
  return AudioClip(std::move(x), sample_rate, std::move(id));
}

}  // namespace sonoclass
