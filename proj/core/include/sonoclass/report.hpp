#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sonoclass/matrix.hpp"

namespace sonoclass {

struct EvaluationReport {
  std::vector<std::string> classes;
  std::vector<double> per_class_accuracy;  // percent, same order as classes
  Matrix<std::size_t> confusion;           // rows = truth, cols = prediction
  double averaged_accuracy = 0.0;          // unweighted mean of per_class_accuracy
  double weighted_accuracy = 0.0;          // correct / total, percent
  std::vector<std::pair<std::string, std::string>> metadata;  // echoed into both outputs
  std::vector<std::pair<std::string, double>> timings_s;      // text output only

  std::size_t total() const;
  std::size_t class_count(std::size_t c) const;
};

// Builds the report from parallel truth/prediction class indices. Classes
// without test rows report 0 accuracy and still count toward the mean.
EvaluationReport make_report(std::vector<std::string> classes, const std::vector<int>& truth,
                             const std::vector<int>& predicted);

// Aligned human-readable table, including timings.
std::string format_report_text(const EvaluationReport& report);

// Machine-readable form: metadata, per-class rows, averages, and the
// confusion matrix. Timings are left out so identical runs compare equal.
std::string format_report_csv(const EvaluationReport& report);

std::string csv_field(const std::string& value);
std::string format_percent(double value);

}  // namespace sonoclass
