#include "sonoclass/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>

#include "sonoclass/error.hpp"
#include "sonoclass/hash.hpp"
#include "sonoclass/rng.hpp"

namespace sonoclass {
namespace {

constexpr std::uint64_t kGridSalt = 0x67726964;  // "grid"

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

OvoOptions ovo_options(const RunConfig& config) {
  OvoOptions opts;
  opts.smo.tol = config.svm_tol;
  opts.smo.max_passes = config.svm_max_passes;
  opts.threads = config.threads;
  return opts;
}

RunConfig with_runtime(RunConfig config, const RunConfig& runtime) {
  config.cache_dir = runtime.cache_dir;
  config.threads = runtime.threads;
  return config;
}

std::string kernel_text(const KernelParams& p) {
  return fmt::format("C={} gamma={}", format_double(p.c), format_double(p.gamma));
}

const KernelParams& chosen_kernel(const TrainedModel& model) {
  if (model.ovo.pairs.empty()) throw Error(Errc::kModelFormat, "model has no pair classifiers");
  return model.ovo.pairs.front().model.params;
}

}  // namespace

DatasetManifest ensure_split(const DatasetManifest& manifest, const RunConfig& config) {
  if (manifest.fully_split()) {
    manifest.validate(true);
    return manifest;
  }
  for (const auto& e : manifest.entries) {
    if (e.split != Split::kUnassigned) {
      throw Error(Errc::kManifest, "manifest mixes assigned and unassigned splits");
    }
  }
  return auto_split(manifest, config.train_fraction, config.seed);
}

TrainOutcome train_on_features(const FeatureMatrix& train, const std::vector<std::string>& classes,
                               const RunConfig& config, std::optional<PatchSet> patches) {
  config.validate();
  train.validate();
  std::vector<std::size_t> counts(classes.size(), 0);
  for (int l : train.labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= classes.size()) {
      throw Error(Errc::kInvalidArgument, "training label outside the class list");
    }
    ++counts[static_cast<std::size_t>(l)];
  }
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (counts[c] == 0) throw Error(Errc::kClassTooSmall, "class '" + classes[c] + "' has no training clips");
  }

  TrainOutcome out;
  const OvoOptions opts = ovo_options(config);

  std::optional<MiSelection> selection;
  if (config.method != Method::kWavelet) {
    Stopwatch sw;
    selection = select_top_k(train, config.mi_top_k, config.mi_bins, config.threads);
    out.mi_seconds = sw.seconds();
  }

  KernelParams params = config.svm;
  if (config.grid_search) {
    Stopwatch sw;
    const FeatureMatrix reduced = selection ? apply_selection(train, *selection) : train;
    const auto c_grid = config.c_grid();
    const auto g_grid = config.gamma_grid();
    out.grid = grid_search_cv(reduced, c_grid, g_grid, config.cv_folds,
                              mix_seed(config.seed, kGridSalt), opts);
    params = out.grid->best;
    out.grid_seconds = sw.seconds();
  }

  Stopwatch sw;
  TrainedModel& model = out.model;
  model.config = config;
  model.config.svm = params;
  model.config.cache_dir.clear();
  model.config.threads = 0;
  model.class_names = classes;
  model.feature_dim = train.dims();
  model.ovo = ovo_train(train, params, opts, std::move(selection));
  model.patches = std::move(patches);
  out.fit_seconds = sw.seconds();
  return out;
}

EvaluationReport evaluate_features(const TrainedModel& model, const FeatureMatrix& test) {
  if (test.dims() != model.feature_dim || test.dims() != model.ovo.input_dim()) {
    throw Error(Errc::kDimensionMismatch,
                fmt::format("features have {} dimensions, the model expects {}", test.dims(),
                            model.feature_dim));
  }
  std::vector<int> predicted(test.samples());
  for (std::size_t r = 0; r < test.samples(); ++r) predicted[r] = ovo_predict(model.ovo, test.values.row(r));
  return make_report(model.class_names, test.labels, predicted);
}

void annotate_report(EvaluationReport& report, const TrainedModel& model, std::uint64_t split_hash) {
  const KernelParams& k = chosen_kernel(model);
  report.metadata = {
      {"method", std::string(method_name(model.config.method))},
      {"split_hash", hex64(split_hash)},
      {"feature_dim", std::to_string(model.feature_dim)},
      {"selected_features", std::to_string(model.ovo.selection.empty()
                                               ? model.feature_dim
                                               : model.ovo.selection.selected.size())},
      {"svm.c", format_double(k.c)},
      {"svm.gamma", format_double(k.gamma)},
      {"pair_models", std::to_string(model.ovo.pairs.size())},
      {"converged", model.ovo.converged() ? "true" : "false"},
      {"config_hash", hex64(fnv1a(to_config_text(model.config)))},
  };
}

TrainOutcome train_model(const DatasetManifest& manifest, const RunConfig& config,
                         ExtractionStats* stats) {
  config.validate();
  const DatasetManifest split = ensure_split(manifest, config);
  const auto classes = split.classes();
  const auto train_entries = split.indices(Split::kTrain);
  std::optional<PatchSet> patches;
  if (config.method == Method::kWavelet) {
    patches = sample_training_patches(split, train_entries, config, stats);
  }
  const FeatureMatrix train =
      extract_rows(split, train_entries, classes, config, patches ? &*patches : nullptr, stats);
  return train_on_features(train, classes, config, std::move(patches));
}

EvaluationReport evaluate_model(const TrainedModel& model, const DatasetManifest& manifest,
                                const RunConfig& runtime, ExtractionStats* stats) {
  const RunConfig config = with_runtime(model.config, runtime);
  if (config.method == Method::kWavelet && !model.patches) {
    throw Error(Errc::kModelFormat, "wavelet model carries no patch set");
  }
  const DatasetManifest split = ensure_split(manifest, config);
  const auto test_entries = split.indices(Split::kTest);
  const FeatureMatrix test = extract_rows(split, test_entries, model.class_names, config,
                                          model.patches ? &*model.patches : nullptr, stats);
  EvaluationReport report = evaluate_features(model, test);
  annotate_report(report, model, split.split_hash());
  return report;
}

MethodRun run_method(const DatasetManifest& manifest, const RunConfig& config, std::string name) {
  MethodRun run;
  run.name = name.empty() ? std::string(method_name(config.method)) : std::move(name);
  run.config = config;
  const DatasetManifest split = ensure_split(manifest, config);
  Stopwatch sw;
  ExtractedFeatures features = extract_features(split, config);
  run.extract_seconds = sw.seconds();
  run.stats = features.stats;
  run.training = train_on_features(features.train, features.classes, config, std::move(features.patches));
  run.report = evaluate_features(run.training.model, features.test);
  annotate_report(run.report, run.training.model, split.split_hash());
  run.report.timings_s = {{"extract", run.extract_seconds},
                          {"mutual_information", run.training.mi_seconds},
                          {"grid_search", run.training.grid_seconds},
                          {"fit", run.training.fit_seconds}};
  return run;
}

Comparison compare_methods(const DatasetManifest& manifest, const RunConfig& config) {
  config.validate();
  const DatasetManifest split = ensure_split(manifest, config);
  Comparison cmp;
  cmp.split_hash = split.split_hash();
  cmp.train_size = split.indices(Split::kTrain).size();
  cmp.test_size = split.indices(Split::kTest).size();
  for (std::size_t s = 1; s <= config.gabor.n_scales(); ++s) {
    for (std::size_t o = 1; o <= config.gabor.n_orientations; ++o) {
      RunConfig c = config;
      c.method = Method::kSingle;
      c.single_scale = s;
      c.single_orientation = o;
      cmp.single_grid.push_back(run_method(split, c, fmt::format("single s{} o{}", s, o)));
    }
  }
  for (Method m : {Method::kBank, Method::kPatches, Method::kWavelet}) {
    RunConfig c = config;
    c.method = m;
    cmp.methods.push_back(run_method(split, c));
  }
  return cmp;
}

namespace {

const MethodRun* best_single(const Comparison& cmp) {
  const MethodRun* best = nullptr;
  for (const MethodRun& r : cmp.single_grid) {
    if (best == nullptr || r.report.averaged_accuracy > best->report.averaged_accuracy) best = &r;
  }
  return best;
}

std::vector<const MethodRun*> method_columns(const Comparison& cmp) {
  std::vector<const MethodRun*> cols;
  if (const MethodRun* b = best_single(cmp)) cols.push_back(b);
  for (const MethodRun& r : cmp.methods) cols.push_back(&r);
  return cols;
}

const std::vector<std::string>& class_list(const Comparison& cmp) {
  static const std::vector<std::string> kEmpty;
  if (!cmp.methods.empty()) return cmp.methods.front().report.classes;
  if (!cmp.single_grid.empty()) return cmp.single_grid.front().report.classes;
  return kEmpty;
}

}  // namespace

std::string comparison_grid_csv(const Comparison& cmp) {
  std::string out = "scale,orientation";
  for (const auto& c : class_list(cmp)) out += "," + csv_field(c);
  out += ",averaged,weighted,c,gamma\n";
  for (const MethodRun& r : cmp.single_grid) {
    out += fmt::format("{},{}", r.config.single_scale, r.config.single_orientation);
    for (double a : r.report.per_class_accuracy) out += "," + format_percent(a);
    const KernelParams& k = chosen_kernel(r.training.model);
    out += fmt::format(",{},{},{},{}\n", format_percent(r.report.averaged_accuracy),
                       format_percent(r.report.weighted_accuracy), format_double(k.c),
                       format_double(k.gamma));
  }
  return out;
}

std::string comparison_methods_csv(const Comparison& cmp) {
  const auto cols = method_columns(cmp);
  std::string out;
  out += fmt::format("meta,split_hash,{}\n", hex64(cmp.split_hash));
  out += fmt::format("meta,train_size,{}\nmeta,test_size,{}\n", cmp.train_size, cmp.test_size);
  out += "row,class";
  for (const MethodRun* r : cols) out += "," + csv_field(r->name);
  out += '\n';
  const auto& classes = class_list(cmp);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    out += "class," + csv_field(classes[c]);
    for (const MethodRun* r : cols) out += "," + format_percent(r->report.per_class_accuracy[c]);
    out += '\n';
  }
  out += "averaged,";
  for (const MethodRun* r : cols) out += "," + format_percent(r->report.averaged_accuracy);
  out += "\nweighted,";
  for (const MethodRun* r : cols) out += "," + format_percent(r->report.weighted_accuracy);
  out += "\nkernel,c";
  for (const MethodRun* r : cols) out += "," + format_double(chosen_kernel(r->training.model).c);
  out += "\nkernel,gamma";
  for (const MethodRun* r : cols) out += "," + format_double(chosen_kernel(r->training.model).gamma);
  out += '\n';
  return out;
}

std::string format_comparison_text(const Comparison& cmp) {
  const auto& classes = class_list(cmp);
  std::size_t cw = 8;
  for (const auto& c : classes) cw = std::max(cw, c.size() + 1);
  std::string out = fmt::format("split {}  train {}  test {}\n\n", hex64(cmp.split_hash),
                                cmp.train_size, cmp.test_size);

  out += "single log-Gabor filter\n";
  out += fmt::format("{:>5} {:>11}", "scale", "orientation");
  for (const auto& c : classes) out += fmt::format(" {:>{}}", c, cw);
  out += fmt::format(" {:>{}}\n", "averaged", cw);
  for (const MethodRun& r : cmp.single_grid) {
    out += fmt::format("{:>5} {:>11}", r.config.single_scale, r.config.single_orientation);
    for (double a : r.report.per_class_accuracy) out += fmt::format(" {:>{}.2f}", a, cw);
    out += fmt::format(" {:>{}.2f}\n", r.report.averaged_accuracy, cw);
  }

  const auto cols = method_columns(cmp);
  std::size_t mw = 10;
  for (const MethodRun* r : cols) mw = std::max(mw, r->name.size() + 1);
  std::size_t lw = 8;
  for (const auto& c : classes) lw = std::max(lw, c.size());
  out += "\nmethod comparison\n";
  out += fmt::format("{:<{}}", "class", lw);
  for (const MethodRun* r : cols) out += fmt::format(" {:>{}}", r->name, mw);
  out += '\n';
  for (std::size_t c = 0; c < classes.size(); ++c) {
    out += fmt::format("{:<{}}", classes[c], lw);
    for (const MethodRun* r : cols) out += fmt::format(" {:>{}.2f}", r->report.per_class_accuracy[c], mw);
    out += '\n';
  }
  out += fmt::format("{:<{}}", "averaged", lw);
  for (const MethodRun* r : cols) out += fmt::format(" {:>{}.2f}", r->report.averaged_accuracy, mw);
  out += fmt::format("\n{:<{}}", "weighted", lw);
  for (const MethodRun* r : cols) out += fmt::format(" {:>{}.2f}", r->report.weighted_accuracy, mw);
  out += "\n\nkernels\n";
  for (const MethodRun* r : cols) {
    out += fmt::format("  {}: {}\n", r->name, kernel_text(chosen_kernel(r->training.model)));
  }
  out += "\ntimings\n";
  for (const MethodRun& r : cmp.single_grid) {
    out += fmt::format("  {}: extract {:.2f} s, train {:.2f} s\n", r.name, r.extract_seconds,
                       r.training.mi_seconds + r.training.grid_seconds + r.training.fit_seconds);
  }
  for (const MethodRun& r : cmp.methods) {
    out += fmt::format("  {}: extract {:.2f} s, train {:.2f} s\n", r.name, r.extract_seconds,
                       r.training.mi_seconds + r.training.grid_seconds + r.training.fit_seconds);
  }
  return out;
}

DatasetManifest write_synthetic_corpus(const std::filesystem::path& out_dir, std::size_t per_class,
                                       double duration_s, int sample_rate, std::uint64_t seed) {
  DatasetManifest manifest;
  manifest.base_dir = out_dir;
  std::uint64_t index = 0;
  for (SynthKind kind : kAllSynthKinds) {
    const std::string label(synth_kind_name(kind));
    for (std::size_t i = 0; i < per_class; ++i, ++index) {
      const AudioClip clip = synthesize_clip(kind, duration_s, sample_rate, seed * 1000003ULL + index);
      const std::filesystem::path rel =
          std::filesystem::path(label) / fmt::format("{}_{:03}.wav", label, i);
      std::filesystem::create_directories(out_dir / rel.parent_path());
      save_wav16(clip, out_dir / rel);
      manifest.entries.push_back({rel, label, Split::kUnassigned});
    }
  }
  return manifest;
}

}  // namespace sonoclass
