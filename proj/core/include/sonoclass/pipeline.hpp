#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sonoclass/config.hpp"
#include "sonoclass/features.hpp"
#include "sonoclass/manifest.hpp"
#include "sonoclass/model_io.hpp"
#include "sonoclass/report.hpp"
#include "sonoclass/svm.hpp"

namespace sonoclass {

// Returns the manifest unchanged when every entry has a split, or a seeded
// stratified split when none has. A partial assignment is an error.
DatasetManifest ensure_split(const DatasetManifest& manifest, const RunConfig& config);

struct TrainOutcome {
  TrainedModel model;
  std::optional<GridSearchResult> grid;  // when config.grid_search is set
  double mi_seconds = 0.0;
  double grid_seconds = 0.0;
  double fit_seconds = 0.0;
};

// Fits MI selection (not for the wavelet method), optionally grid-searches
// (C, gamma), then trains the one-against-one model.
TrainOutcome train_on_features(const FeatureMatrix& train, const std::vector<std::string>& classes,
                               const RunConfig& config, std::optional<PatchSet> patches = {});

// Predicts every row and tabulates against the row labels.
EvaluationReport evaluate_features(const TrainedModel& model, const FeatureMatrix& test);

struct MethodRun {
  std::string name;
  RunConfig config;
  TrainOutcome training;
  EvaluationReport report;
  ExtractionStats stats;
  double extract_seconds = 0.0;
};

// Extracts, trains and evaluates one configuration on a split manifest.
MethodRun run_method(const DatasetManifest& manifest, const RunConfig& config, std::string name = {});

// train: extraction on the train split plus train_on_features.
TrainOutcome train_model(const DatasetManifest& manifest, const RunConfig& config,
                         ExtractionStats* stats = nullptr);

// evaluate: the model's own feature configuration is reused; only the
// runtime fields (cache_dir, threads) come from `runtime`.
EvaluationReport evaluate_model(const TrainedModel& model, const DatasetManifest& manifest,
                                const RunConfig& runtime, ExtractionStats* stats = nullptr);

struct Comparison {
  std::uint64_t split_hash = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::vector<MethodRun> single_grid;  // scale-major, 1-based labels in each config
  std::vector<MethodRun> methods;      // bank, patches, wavelet
};

Comparison compare_methods(const DatasetManifest& manifest, const RunConfig& config);

std::string format_comparison_text(const Comparison& comparison);
// Single-filter grid: one row per (scale, orientation) with every class.
std::string comparison_grid_csv(const Comparison& comparison);
// Method comparison: the best single filter, bank, patches, wavelet.
std::string comparison_methods_csv(const Comparison& comparison);

// Writes per_class clips of every synthetic kind as 16-bit WAV files under
// <out_dir>/<kind>/ and returns an unsplit manifest relative to out_dir.
// Clip i (counted across all kinds) uses seed * 1000003 + i.
DatasetManifest write_synthetic_corpus(const std::filesystem::path& out_dir, std::size_t per_class,
                                       double duration_s, int sample_rate, std::uint64_t seed);

// Metadata rows echoed into a report: method, split hash, chosen kernel, config.
void annotate_report(EvaluationReport& report, const TrainedModel& model, std::uint64_t split_hash);

}  // namespace sonoclass
