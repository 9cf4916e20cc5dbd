#include "sonoclass/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

#include "sonoclass/error.hpp"

namespace sonoclass {

std::size_t EvaluationReport::total() const {
  return std::accumulate(confusion.flat().begin(), confusion.flat().end(), std::size_t{0});
}

std::size_t EvaluationReport::class_count(std::size_t c) const {
  const auto row = confusion.row(c);
  return std::accumulate(row.begin(), row.end(), std::size_t{0});
}

std::string format_percent(double value) { return fmt::format("{:.6f}", value); }

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char ch : value) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

EvaluationReport make_report(std::vector<std::string> classes, const std::vector<int>& truth,
                             const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(Errc::kLengthMismatch, "truth and prediction counts differ");
  }
  const std::size_t k = classes.size();
  if (k == 0) throw Error(Errc::kEmptyInput, "report needs at least one class");
  EvaluationReport r;
  r.classes = std::move(classes);
  r.confusion = Matrix<std::size_t>(k, k, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || static_cast<std::size_t>(truth[i]) >= k || predicted[i] < 0 ||
        static_cast<std::size_t>(predicted[i]) >= k) {
      throw Error(Errc::kInvalidArgument, "class index outside the report's classes");
    }
    ++r.confusion(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(predicted[i]));
    if (truth[i] == predicted[i]) ++correct;
  }
  r.per_class_accuracy.resize(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t n = r.class_count(c);
    if (n > 0) r.per_class_accuracy[c] = 100.0 * static_cast<double>(r.confusion(c, c)) / n;
  }
  r.averaged_accuracy =
      std::accumulate(r.per_class_accuracy.begin(), r.per_class_accuracy.end(), 0.0) /
      static_cast<double>(k);
  r.weighted_accuracy =
      truth.empty() ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(truth.size());
  return r;
}

std::string format_report_text(const EvaluationReport& r) {
  std::size_t width = 5;
  for (const auto& c : r.classes) width = std::max(width, c.size());
  std::string out;
  for (const auto& [key, value] : r.metadata) out += fmt::format("{}: {}\n", key, value);
  if (!r.metadata.empty()) out += '\n';

  out += fmt::format("{:<{}}  {:>6}  {:>9}\n", "class", width, "tests", "accuracy");
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    out += fmt::format("{:<{}}  {:>6}  {:>8.2f}%\n", r.classes[c], width, r.class_count(c),
                       r.per_class_accuracy[c]);
  }
  out += fmt::format("{:<{}}  {:>6}  {:>8.2f}%\n", "averaged", width, r.total(), r.averaged_accuracy);
  out += fmt::format("{:<{}}  {:>6}  {:>8.2f}%\n", "weighted", width, r.total(), r.weighted_accuracy);

  out += "\nconfusion (rows = truth, columns = prediction)\n";
  std::size_t cell = 4;
  for (std::size_t v : r.confusion.flat()) cell = std::max(cell, fmt::formatted_size("{}", v) + 1);
  std::size_t label_width = 0;
  for (std::size_t t = 0; t < r.classes.size(); ++t) {
    label_width = std::max(label_width, fmt::formatted_size("{} {}", t, r.classes[t]));
  }
  out += fmt::format("{:<{}}", "", label_width);
  for (std::size_t c = 0; c < r.classes.size(); ++c) out += fmt::format(" {:>{}}", c, cell);
  out += '\n';
  for (std::size_t t = 0; t < r.classes.size(); ++t) {
    out += fmt::format("{:<{}}", fmt::format("{} {}", t, r.classes[t]), label_width);
    for (std::size_t p = 0; p < r.classes.size(); ++p) {
      out += fmt::format(" {:>{}}", r.confusion(t, p), cell);
    }
    out += '\n';
  }
  if (!r.timings_s.empty()) {
    out += "\ntimings\n";
    for (const auto& [key, seconds] : r.timings_s) out += fmt::format("  {}: {:.3f} s\n", key, seconds);
  }
  return out;
}

std::string format_report_csv(const EvaluationReport& r) {
  std::string out;
  for (const auto& [key, value] : r.metadata) {
    out += fmt::format("meta,{},{}\n", csv_field(key), csv_field(value));
  }
  out += "section,class,tests,correct,accuracy\n";
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    out += fmt::format("class,{},{},{},{}\n", csv_field(r.classes[c]), r.class_count(c),
                       r.confusion(c, c), format_percent(r.per_class_accuracy[c]));
  }
  std::size_t correct = 0;
  for (std::size_t c = 0; c < r.classes.size(); ++c) correct += r.confusion(c, c);
  out += fmt::format("averaged,,{},{},{}\n", r.total(), correct, format_percent(r.averaged_accuracy));
  out += fmt::format("weighted,,{},{},{}\n", r.total(), correct, format_percent(r.weighted_accuracy));
  out += "confusion,truth";
  for (const auto& c : r.classes) out += "," + csv_field(c);
  out += '\n';
  for (std::size_t t = 0; t < r.classes.size(); ++t) {
    out += "confusion," + csv_field(r.classes[t]);
    for (std::size_t p = 0; p < r.classes.size(); ++p) out += fmt::format(",{}", r.confusion(t, p));
    out += '\n';
  }
  return out;
}

}  // namespace sonoclass
