#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "../oracles/oracles.hpp"
#include "../support.hpp"
#include "sonoclass/audio_io.hpp"
#include "sonoclass/error.hpp"

using namespace sonoclass;
using testing_support::make_wav;
using testing_support::raw_bytes;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an exception";
  return Errc::kIo;
}

}  // namespace

TEST(AudioIo, Pcm16FullScaleMapsToRatio) {
  const std::vector<std::int16_t> v(10, 32767);
  const AudioClip clip = decode_wav(make_wav(1, 1, 8000, 16, raw_bytes(v)));
  ASSERT_EQ(clip.size(), 10u);
  for (double s : clip.samples()) EXPECT_DOUBLE_EQ(s, 32767.0 / 32768.0);
  EXPECT_EQ(clip.sample_rate(), 8000);
}

TEST(AudioIo, Pcm16ZerosDecodeToZero) {
  const std::vector<std::int16_t> v(7, 0);
  const AudioClip clip = decode_wav(make_wav(1, 1, 44100, 16, raw_bytes(v)));
  for (double s : clip.samples()) EXPECT_EQ(s, 0.0);
}

TEST(AudioIo, StereoOppositeChannelsAverageToZero) {
  std::vector<float> v;
  for (int i = 0; i < 5; ++i) {
    v.push_back(0.5f);
    v.push_back(-0.5f);
  }
  const AudioClip clip = decode_wav(make_wav(3, 2, 22050, 32, raw_bytes(v)));
  ASSERT_EQ(clip.size(), 5u);
  for (double s : clip.samples()) EXPECT_EQ(s, 0.0);
}

TEST(AudioIo, DecodesEveryIntegerWidth) {
  // 8-bit unsigned: 0 -> -1, 128 -> 0.
  const AudioClip c8 = decode_wav(make_wav(1, 1, 8000, 8, {0, 128, 255}));
  EXPECT_DOUBLE_EQ(c8.samples()[0], -1.0);
  EXPECT_DOUBLE_EQ(c8.samples()[1], 0.0);
  EXPECT_DOUBLE_EQ(c8.samples()[2], 127.0 / 128.0);

  // 24-bit little endian: 0x400000 = 2^22 -> 0.5, 0x800000 -> -1.
  const AudioClip c24 = decode_wav(make_wav(1, 1, 8000, 24, {0x00, 0x00, 0x40, 0x00, 0x00, 0x80}));
  EXPECT_DOUBLE_EQ(c24.samples()[0], 0.5);
  EXPECT_DOUBLE_EQ(c24.samples()[1], -1.0);

  const std::vector<std::int32_t> v32{std::numeric_limits<std::int32_t>::min(), 1 << 30};
  const AudioClip c32 = decode_wav(make_wav(1, 1, 8000, 32, raw_bytes(v32)));
  EXPECT_DOUBLE_EQ(c32.samples()[0], -1.0);
  EXPECT_DOUBLE_EQ(c32.samples()[1], 0.5);
}

TEST(AudioIo, ExtensibleFormatUsesSubformat) {
  const std::vector<std::int16_t> v{16384, -16384};
  const AudioClip clip = decode_wav(make_wav(1, 1, 16000, 16, raw_bytes(v), true));
  EXPECT_DOUBLE_EQ(clip.samples()[0], 0.5);
  EXPECT_DOUBLE_EQ(clip.samples()[1], -0.5);
}

TEST(AudioIo, DownmixPreservesFrameCount) {
  std::vector<std::int16_t> v(2 * 33, 1000);
  EXPECT_EQ(decode_wav(make_wav(1, 2, 8000, 16, raw_bytes(v))).size(), 33u);
}

TEST(AudioIo, RejectsBadContainers) {
  EXPECT_EQ(code_of([] { decode_wav(std::vector<std::uint8_t>{'R', 'I', 'F'}); }),
            Errc::kMalformedContainer);
  auto wav = make_wav(1, 1, 8000, 16, raw_bytes(std::vector<std::int16_t>(4, 1)));
  wav[0] = 'X';
  EXPECT_EQ(code_of([&] { decode_wav(wav); }), Errc::kMalformedContainer);
  auto truncated = make_wav(1, 1, 8000, 16, raw_bytes(std::vector<std::int16_t>(8, 1)));
  truncated.resize(truncated.size() - 4);
  EXPECT_EQ(code_of([&] { decode_wav(truncated); }), Errc::kMalformedContainer);
  EXPECT_EQ(code_of([] { decode_wav(make_wav(2, 1, 8000, 4, {0, 1})); }), Errc::kUnsupportedEncoding);
  EXPECT_EQ(code_of([] { decode_wav(make_wav(1, 1, 8000, 16, {})); }), Errc::kEmptyAudio);
}

TEST(AudioIo, Wav16RoundTripWithinQuantization) {
  const AudioClip clip = synthesize_clip(SynthKind::kHarmonicTone, 0.05, 16000, 3);
  const AudioClip back = decode_wav(encode_wav16(clip));
  ASSERT_EQ(back.size(), clip.size());
  for (std::size_t i = 0; i < clip.size(); ++i) {
    // Encoding scales by 32767 and rounds, decoding divides by 32768.
    const double x = clip.samples()[i];
    EXPECT_NEAR(back.samples()[i], x, (0.5 + std::abs(x)) / 32768.0 + 1e-15);
  }
}

TEST(AudioIo, SaveAndLoadFile) {
  testing_support::TempDir dir("wav");
  const AudioClip clip = synthesize_clip(SynthKind::kChirp, 0.1, 8000, 1);
  save_wav16(clip, dir.path() / "x.wav");
  const AudioClip back = load_wav(dir.path() / "x.wav");
  EXPECT_EQ(back.size(), clip.size());
  EXPECT_EQ(back.sample_rate(), 8000);
  EXPECT_EQ(code_of([&] { load_wav(dir.path() / "missing.wav"); }), Errc::kIo);
}

TEST(AudioIo, PeakNormalizeExamples) {
  const AudioClip a = peak_normalize(AudioClip({0.25, -0.5}, 8000));
  EXPECT_EQ(a.samples()[0], 0.5);
  EXPECT_EQ(a.samples()[1], -1.0);
  const AudioClip silent = peak_normalize(AudioClip({0.0, 0.0, 0.0}, 8000));
  for (double s : silent.samples()) EXPECT_EQ(s, 0.0);
  const AudioClip unit = peak_normalize(AudioClip({1.0, 0.1}, 8000));
  EXPECT_EQ(unit.samples()[0], 1.0);
  EXPECT_EQ(unit.samples()[1], 0.1);
}

TEST(AudioIo, PeakNormalizeIsIdempotent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    std::vector<double> s(257);
    for (double& v : s) v = rng.uniform(-0.7, 0.7);
    const AudioClip once = peak_normalize(AudioClip(s, 8000));
    const AudioClip twice = peak_normalize(once);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(once.samples()[i], twice.samples()[i]);
  }
}

TEST(AudioIo, ClipRejectsOutOfRangeSamples) {
  EXPECT_THROW(AudioClip({1.5}, 8000), Error);
  EXPECT_THROW(AudioClip({}, 8000), Error);
  EXPECT_THROW(AudioClip({0.1}, 0), Error);
}

TEST(Synth, DeterministicForFixedArguments) {
  for (SynthKind kind : kAllSynthKinds) {
    const AudioClip a = synthesize_clip(kind, 0.3, 16000, 42);
    const AudioClip b = synthesize_clip(kind, 0.3, 16000, 42);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a.samples()[i], b.samples()[i]);
  }
}

TEST(Synth, ImpulseTrainIsIsolatedPeriodicImpulses) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const AudioClip clip = synthesize_clip(SynthKind::kImpulseTrain, 1.0, 44100, seed);
    const SynthRecipe r = synth_recipe(SynthKind::kImpulseTrain, 1.0, 44100, seed);
    EXPECT_GE(r.period_s, 0.05);
    EXPECT_LE(r.period_s, 0.2);
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < clip.size(); ++i) {
      if (clip.samples()[i] != 0.0) hits.push_back(i);
    }
    ASSERT_GE(hits.size(), 2u);
    for (std::size_t i = 1; i < hits.size(); ++i) {
      const double gap = static_cast<double>(hits[i] - hits[i - 1]) / 44100.0;
      EXPECT_NEAR(gap, r.period_s, 1.5 / 44100.0);
    }
  }
}

TEST(Synth, HarmonicEnergyAtFirstThreeHarmonics) {
  // Direct DFT of a 4096-sample excerpt: the three largest local peaks sit
  // within one bin of f0, 2 f0 and 3 f0.
  const int rate = 44100;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const SynthRecipe r = synth_recipe(SynthKind::kHarmonicTone, 1.0, rate, seed);
    EXPECT_GE(r.fundamental_hz, 200.0);
    EXPECT_LE(r.fundamental_hz, 800.0);
    const AudioClip clip = synthesize_clip(SynthKind::kHarmonicTone, 1.0, rate, seed);
    const std::size_t n = 4096;
    std::vector<double> x(clip.samples().begin() + 10000, clip.samples().begin() + 10000 + n);
    for (std::size_t i = 0; i < n; ++i) x[i] *= 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
    const auto spec = oracle::direct_dft(x);
    const double bin_hz = static_cast<double>(rate) / n;
    double in_band = 0.0, total = 0.0;
    for (std::size_t k = 1; k < n / 2; ++k) {
      const double e = std::norm(spec[k]);
      total += e;
      for (int h = 1; h <= 3; ++h) {
        if (std::abs(k * bin_hz - h * r.fundamental_hz) <= 3.0 * bin_hz) in_band += e;
      }
    }
    EXPECT_GT(in_band / total, 0.99) << "seed " << seed;
  }
}

TEST(Synth, ChirpBandAndNoiseEnvelope) {
  const SynthRecipe chirp = synth_recipe(SynthKind::kChirp, 1.0, 44100, 9);
  EXPECT_LT(chirp.sweep_start_hz, chirp.sweep_end_hz);
  EXPECT_LE(chirp.sweep_end_hz, 0.5 * 44100);
  const AudioClip noise = synthesize_clip(SynthKind::kNoiseBurst, 1.0, 16000, 9);
  const SynthRecipe nr = synth_recipe(SynthKind::kNoiseBurst, 1.0, 16000, 9);
  const auto onset = static_cast<std::size_t>(nr.offset_s * 16000);
  for (std::size_t i = 0; i + 1 < onset; ++i) EXPECT_EQ(noise.samples()[i], 0.0);
  EXPECT_THROW(synthesize_clip(SynthKind::kChirp, 0.0, 16000, 1), Error);
}

TEST(Synth, KindNamesRoundTrip) {
  for (SynthKind kind : kAllSynthKinds) EXPECT_EQ(parse_synth_kind(synth_kind_name(kind)), kind);
  EXPECT_FALSE(parse_synth_kind("whistle").has_value());
}
