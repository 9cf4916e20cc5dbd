#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sonoclass {

/// Mono audio at its native sample rate, amplitudes in [-1, 1].
///
/// The constructor enforces the invariants (non-empty, finite, within
/// [-1, 1], positive rate) and throws `Error` otherwise. Instances are
/// immutable and safe to share across threads.
class AudioClip {
 public:
  AudioClip(std::vector<double> samples, int sample_rate,
            std::string source_id = {});

  std::span<const double> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  int sample_rate() const noexcept { return sample_rate_; }
  const std::string& source_id() const noexcept { return source_id_; }
  double duration_s() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

 private:
  std::vector<double> samples_;
  int sample_rate_;
  std::string source_id_;
};

// RIFF/WAVE reading. Accepts PCM 8/16/24/32-bit integer and 32-bit IEEE
// float (plain or WAVE_FORMAT_EXTENSIBLE), mono or stereo. Stereo is
// averaged to mono; float samples are clamped to [-1, 1].
AudioClip load_wav(const std::filesystem::path& path);
AudioClip decode_wav(std::span<const std::uint8_t> bytes,
                     std::string source_id = {});

// 16-bit PCM mono output, samples rounded to the nearest code.
std::vector<std::uint8_t> encode_wav16(const AudioClip& clip);
void save_wav16(const AudioClip& clip, const std::filesystem::path& path);

// Scales so that max |sample| == 1; silent clips are returned unchanged.
AudioClip peak_normalize(const AudioClip& clip);

enum class SynthKind { kNoiseBurst, kHarmonicTone, kChirp, kImpulseTrain };

inline constexpr SynthKind kAllSynthKinds[] = {
    SynthKind::kNoiseBurst, SynthKind::kHarmonicTone, SynthKind::kChirp,
    SynthKind::kImpulseTrain};

std::string_view synth_kind_name(SynthKind kind) noexcept;
std::optional<SynthKind> parse_synth_kind(std::string_view name) noexcept;

// The seed-chosen parameters behind a synthesized clip.
struct SynthRecipe {
  SynthKind kind;
  double fundamental_hz = 0.0;  // harmonic_tone
  double sweep_start_hz = 0.0;  // chirp
  double sweep_end_hz = 0.0;    // chirp
  double period_s = 0.0;        // impulse_train
  double offset_s = 0.0;        // impulse_train first impulse, noise_burst onset
  double attack_s = 0.0;        // noise_burst
  double decay_s = 0.0;         // noise_burst
};

SynthRecipe synth_recipe(SynthKind kind, double duration_s, int sample_rate,
                         std::uint64_t seed);

// Deterministic synthetic clip; the same arguments always give the same
// samples. Throws InvalidDuration unless duration_s > 0 and yields at least
// one sample.
AudioClip synthesize_clip(SynthKind kind, double duration_s, int sample_rate,
                          std::uint64_t seed);

}  // namespace sonoclass
