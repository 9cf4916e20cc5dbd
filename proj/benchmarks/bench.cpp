#include <benchmark/benchmark.h>

#include "sonoclass/audio_io.hpp"
#include "sonoclass/log_gabor.hpp"
#include "sonoclass/rng.hpp"
#include "sonoclass/spectrogram.hpp"
#include "sonoclass/svm.hpp"
#include "sonoclass/wavelet_baseline.hpp"

using namespace sonoclass;

namespace {

RealMatrix random_grid(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  RealMatrix m(n, n);
  for (double& v : m.flat()) v = rng.uniform01();
  return m;
}

void BM_Stft(benchmark::State& state) {
  const AudioClip clip = synthesize_clip(SynthKind::kChirp, 1.0, 16000, 1);
  for (auto _ : state) benchmark::DoNotOptimize(compute_spectrogram(clip, StftParams{}));
}
BENCHMARK(BM_Stft);

void BM_BankAverage(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const LogGaborBank bank = build_bank(n, n, LogGaborParams{});
  FixedSpectrogram spec;
  spec.values = random_grid(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(method2_feature(spec, bank));
}
BENCHMARK(BM_BankAverage)->Arg(64)->Arg(128);

void BM_C1Maps(benchmark::State& state) {
  const RealMatrix s = random_grid(128, 3);
  for (auto _ : state) benchmark::DoNotOptimize(c1_maps(s));
}
BENCHMARK(BM_C1Maps);

void BM_WaveletFeatures(benchmark::State& state) {
  std::vector<WaveletPlanes> training{c1_maps(random_grid(128, 4)), c1_maps(random_grid(128, 5))};
  const PatchSet patches = sample_patches(training, 200, kDefaultPatchSizes, 1);
  const WaveletPlanes probe = c1_maps(random_grid(128, 6));
  for (auto _ : state) benchmark::DoNotOptimize(wavelet_features(probe, patches));
}
BENCHMARK(BM_WaveletFeatures);

void BM_Smo(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(7);
  RealMatrix x(n, 16);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = i % 2 == 0 ? 1 : -1;
    for (std::size_t k = 0; k < 16; ++k) x(i, k) = rng.normal() + 0.5 * y[i];
  }
  const RealMatrix kernel = rbf_gram(x, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(smo_solve(kernel, y, 8.0));
}
BENCHMARK(BM_Smo)->Arg(80)->Arg(320);

}  // namespace

BENCHMARK_MAIN();
