#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sonoclass/audio_io.hpp"
#include "sonoclass/config.hpp"
#include "sonoclass/error.hpp"
#include "sonoclass/features.hpp"
#include "sonoclass/feature_select.hpp"
#include "sonoclass/log_gabor.hpp"
#include "sonoclass/manifest.hpp"
#include "sonoclass/model_io.hpp"
#include "sonoclass/pipeline.hpp"
#include "sonoclass/report.hpp"

namespace fs = std::filesystem;
using namespace sonoclass;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNonConvergence = 3;

// Flags shared by every subcommand that builds a RunConfig.
struct ConfigFlags {
  std::string config_path;
  std::optional<std::string> method;
  std::optional<std::size_t> scale;
  std::optional<std::size_t> orientation;
  std::optional<std::size_t> top_k;
  std::optional<double> c;
  std::optional<double> gamma;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> cache_dir;
  std::optional<std::size_t> threads;
  bool grid_search = false;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value configuration file");
    app->add_option("--method", method, "single | bank | patches | wavelet");
    app->add_option("--scale", scale, "filter scale for method single (1-based)");
    app->add_option("--orientation", orientation, "filter orientation for method single (1-based)");
    app->add_option("--top-k", top_k, "features kept by mutual information");
    app->add_option("--c", c, "SVM box constraint C");
    app->add_option("--gamma", gamma, "RBF kernel gamma");
    app->add_option("--seed", seed, "seed for splits, folds and patch sampling");
    app->add_option("--cache-dir", cache_dir, "feature cache directory");
    app->add_option("--threads", threads, "worker threads (0 = all cores)");
    app->add_flag("--grid-search", grid_search, "choose C and gamma by cross-validation");
    app->add_option("--set", overrides, "extra key=value configuration override")->take_all();
  }

  RunConfig resolve() const {
    RunConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    auto set = [&](std::string_view key, const std::string& value) { set_config_value(config, key, value); };
    if (method) set("method", *method);
    if (scale) config.single_scale = *scale;
    if (orientation) config.single_orientation = *orientation;
    if (top_k) config.mi_top_k = *top_k;
    if (c) config.svm.c = *c;
    if (gamma) config.svm.gamma = *gamma;
    if (seed) config.seed = *seed;
    if (cache_dir) config.cache_dir = *cache_dir;
    if (threads) config.threads = *threads;
    if (grid_search) config.grid_search = true;
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(Errc::kConfig, "--set expects key=value, got " + kv);
      std::string key = kv.substr(0, eq);
      while (!key.empty() && key.back() == ' ') key.pop_back();
      set(key, kv.substr(eq + 1));
    }
    config.validate();
    return config;
  }
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::kIo, "cannot write " + path.string());
}

std::string matrix_csv(const RealMatrix& m) {
  std::string out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  return out;
}

std::string features_csv(const FeatureMatrix& fm, const std::vector<std::string>& classes) {
  std::string out = "label";
  for (const auto& name : fm.feature_names) out += "," + name;
  out += '\n';
  for (std::size_t r = 0; r < fm.samples(); ++r) {
    out += csv_field(classes.at(static_cast<std::size_t>(fm.labels[r])));
    for (double v : fm.values.row(r)) out += "," + format_double(v);
    out += '\n';
  }
  return out;
}

void print_stats(const ExtractionStats& s) {
  fmt::print(stderr, "cache: spectrograms {} hit / {} computed, features {} hit / {} computed\n",
             s.spectrogram_hits, s.spectrogram_misses, s.feature_hits, s.feature_misses);
}

int run_synth(const fs::path& out_dir, std::size_t per_class, double duration, int rate,
              std::uint64_t seed, bool split, double train_fraction) {
  DatasetManifest manifest = write_synthetic_corpus(out_dir, per_class, duration, rate, seed);
  if (split) manifest = auto_split(std::move(manifest), train_fraction, seed);
  save_manifest(manifest, out_dir / "manifest.tsv");
  fmt::print("wrote {} clips and {}\n", manifest.entries.size(), (out_dir / "manifest.tsv").string());
  return kExitOk;
}

int run_extract(const fs::path& manifest_path, const RunConfig& config, const fs::path& out_dir,
                const std::string& inspect) {
  if (!inspect.empty()) {
    const FixedSpectrogram spec = clip_spectrogram(load_wav(inspect), config);
    write_text(out_dir / "spectrogram.csv", matrix_csv(spec.values));
    const LogGaborBank bank = build_bank(config.grid_rows, config.grid_cols, config.gabor);
    for (std::size_t s = 0; s < bank.params().n_scales(); ++s) {
      for (std::size_t o = 0; o < bank.params().n_orientations; ++o) {
        write_text(out_dir / fmt::format("mask_s{}_o{}.csv", s + 1, o + 1), matrix_csv(bank.filter(s, o)));
      }
    }
    fmt::print("wrote spectrogram and {} filter masks to {}\n", bank.size(), out_dir.string());
    if (manifest_path.empty()) return kExitOk;
  }
  const DatasetManifest manifest = ensure_split(load_manifest(manifest_path), config);
  const ExtractedFeatures f = extract_features(manifest, config);
  print_stats(f.stats);
  write_text(out_dir / "features_train.csv", features_csv(f.train, f.classes));
  write_text(out_dir / "features_test.csv", features_csv(f.test, f.classes));
  if (config.method != Method::kWavelet) {
    const MiSelection sel = select_top_k(f.train, config.mi_top_k, config.mi_bins, config.threads);
    std::string csv = "feature,name,score_bits,rank\n";
    std::vector<std::size_t> rank(sel.input_dim, 0);
    for (std::size_t r = 0; r < sel.selected.size(); ++r) rank[sel.selected[r]] = r + 1;
    for (std::size_t i = 0; i < sel.input_dim; ++i) {
      csv += fmt::format("{},{},{},{}\n", i, f.train.feature_names[i], format_double(sel.scores[i]),
                         rank[i] ? std::to_string(rank[i]) : std::string());
    }
    write_text(out_dir / "mi_scores.csv", csv);
  }
  fmt::print("train {}x{}, test {}x{} written to {}\n", f.train.samples(), f.train.dims(),
             f.test.samples(), f.test.dims(), out_dir.string());
  return kExitOk;
}

int run_train(const fs::path& manifest_path, const RunConfig& config, const fs::path& out) {
  ExtractionStats stats;
  const TrainOutcome t = train_model(load_manifest(manifest_path), config, &stats);
  print_stats(stats);
  save_model(t.model, out);
  const KernelParams& k = t.model.ovo.pairs.front().model.params;
  fmt::print("{} classes, {} pair models, C={} gamma={}, model written to {}\n",
             t.model.class_names.size(), t.model.ovo.pairs.size(), format_double(k.c),
             format_double(k.gamma), out.string());
  if (t.grid) fmt::print("cross-validation accuracy {:.2f}%\n", 100.0 * t.grid->best_accuracy);
  if (!t.model.ovo.converged()) {
    fmt::print(stderr, "warning: SMO hit its iteration cap on at least one pair model\n");
    return kExitNonConvergence;
  }
  return kExitOk;
}

int run_evaluate(const fs::path& model_path, const fs::path& manifest_path, const RunConfig& runtime,
                 const fs::path& out_dir) {
  const TrainedModel model = load_model(model_path);
  ExtractionStats stats;
  const EvaluationReport report = evaluate_model(model, load_manifest(manifest_path), runtime, &stats);
  print_stats(stats);
  const std::string text = format_report_text(report);
  fmt::print("{}", text);
  if (!out_dir.empty()) {
    write_text(out_dir / "report.txt", text);
    write_text(out_dir / "report.csv", format_report_csv(report));
  }
  return model.ovo.converged() ? kExitOk : kExitNonConvergence;
}

int run_gridsearch(const fs::path& manifest_path, RunConfig config, const fs::path& out_dir) {
  config.grid_search = true;
  ExtractionStats stats;
  const TrainOutcome t = train_model(load_manifest(manifest_path), config, &stats);
  print_stats(stats);
  std::string csv = "c,gamma,cv_accuracy\n";
  for (const CvCell& cell : t.grid->table) {
    csv += fmt::format("{},{},{}\n", format_double(cell.c), format_double(cell.gamma),
                       format_double(cell.accuracy));
  }
  fmt::print("best C={} gamma={} cv accuracy {:.2f}% over {} cells\n", format_double(t.grid->best.c),
             format_double(t.grid->best.gamma), 100.0 * t.grid->best_accuracy, t.grid->table.size());
  if (!out_dir.empty()) write_text(out_dir / "gridsearch.csv", csv);
  return kExitOk;
}

int run_compare(const fs::path& manifest_path, const RunConfig& config, const fs::path& out_dir) {
  const Comparison cmp = compare_methods(load_manifest(manifest_path), config);
  const std::string text = format_comparison_text(cmp);
  fmt::print("{}", text);
  if (!out_dir.empty()) {
    write_text(out_dir / "comparison.txt", text);
    write_text(out_dir / "single_grid.csv", comparison_grid_csv(cmp));
    write_text(out_dir / "methods.csv", comparison_methods_csv(cmp));
    for (const MethodRun& r : cmp.methods) {
      write_text(out_dir / "reports" / (r.name + ".csv"), format_report_csv(r.report));
    }
  }
  bool converged = true;
  for (const MethodRun& r : cmp.single_grid) converged = converged && r.training.model.ovo.converged();
  for (const MethodRun& r : cmp.methods) converged = converged && r.training.model.ovo.converged();
  return converged ? kExitOk : kExitNonConvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Environmental sound classification from spectrogram texture"};
  app.require_subcommand(1);

  std::string manifest_path, out, model_path, inspect;

  ConfigFlags extract_flags, split_flags, train_flags, eval_flags, grid_flags, compare_flags;

  auto* extract = app.add_subcommand("extract", "compute feature matrices for a manifest");
  extract->add_option("--manifest", manifest_path, "dataset manifest (.tsv or .json)");
  extract->add_option("--out", out, "output directory")->required();
  extract->add_option("--inspect", inspect, "also export one clip's spectrogram and the filter masks");
  extract_flags.attach(extract);

  double train_fraction = 2.0 / 3.0;
  auto* split = app.add_subcommand("split", "assign a stratified train/test split");
  split->add_option("--manifest", manifest_path, "dataset manifest")->required();
  split->add_option("--out", out, "output manifest (.tsv)")->required();
  split->add_option("--train-fraction", train_fraction, "fraction of each class used for training");
  split_flags.attach(split);

  auto* train = app.add_subcommand("train", "train a one-against-one SVM model");
  train->add_option("--manifest", manifest_path, "dataset manifest")->required();
  train->add_option("--out", out, "model file")->required();
  train_flags.attach(train);

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a model on the test split");
  evaluate->add_option("--model", model_path, "model file")->required();
  evaluate->add_option("--manifest", manifest_path, "dataset manifest")->required();
  evaluate->add_option("--out", out, "directory for report.txt and report.csv");
  eval_flags.attach(evaluate);

  auto* grid = app.add_subcommand("gridsearch", "cross-validate the (C, gamma) grid");
  grid->add_option("--manifest", manifest_path, "dataset manifest")->required();
  grid->add_option("--out", out, "directory for gridsearch.csv");
  grid_flags.attach(grid);

  auto* compare = app.add_subcommand("compare", "run every method on one shared split");
  compare->add_option("--manifest", manifest_path, "dataset manifest")->required();
  compare->add_option("--out", out, "directory for the comparison tables");
  compare_flags.attach(compare);

  std::size_t per_class = 60;
  double duration = 1.0;
  int rate = 16000;
  std::uint64_t synth_seed = 1;
  bool synth_split = false;
  auto* synth = app.add_subcommand("synth", "generate the synthetic four-class corpus");
  synth->add_option("--out", out, "output directory")->required();
  synth->add_option("--per-class", per_class, "clips per class");
  synth->add_option("--duration", duration, "clip length in seconds");
  synth->add_option("--rate", rate, "sample rate in Hz");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_flag("--split", synth_split, "also assign a 2/3 train split");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) return run_synth(out, per_class, duration, rate, synth_seed, synth_split, train_fraction);
    if (*extract) {
      if (manifest_path.empty() && inspect.empty()) {
        throw Error(Errc::kInvalidArgument, "extract needs --manifest or --inspect");
      }
      return run_extract(manifest_path, extract_flags.resolve(), out, inspect);
    }
    if (*split) {
      const RunConfig config = split_flags.resolve();
      DatasetManifest m = auto_split(load_manifest(manifest_path), train_fraction, config.seed);
      const fs::path out_dir = fs::absolute(out).parent_path();
      for (auto& e : m.entries) e.path = fs::relative(fs::absolute(m.resolve(e)), out_dir);
      m.base_dir = out_dir;
      save_manifest(m, out);
      fmt::print("train {} / test {} written to {}\n", m.indices(Split::kTrain).size(),
                 m.indices(Split::kTest).size(), out);
      return kExitOk;
    }
    if (*train) return run_train(manifest_path, train_flags.resolve(), out);
    if (*evaluate) return run_evaluate(model_path, manifest_path, eval_flags.resolve(), out);
    if (*grid) return run_gridsearch(manifest_path, grid_flags.resolve(), out);
    if (*compare) return run_compare(manifest_path, compare_flags.resolve(), out);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return is_usage_error(e.code()) ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
