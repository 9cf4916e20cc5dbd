#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sonoclass/matrix.hpp"

namespace sonoclass {

// Rows are samples, columns are features; labels are class indices in [0, k).
struct FeatureMatrix {
  RealMatrix values;
  std::vector<int> labels;
  std::vector<std::string> feature_names;

  std::size_t samples() const noexcept { return values.rows(); }
  std::size_t dims() const noexcept { return values.cols(); }
  // Throws LengthMismatch / InvalidArgument on shape, label or finiteness
  // violations.
  void validate() const;
};

struct BinEdges {
  double lo = 0.0;
  double hi = 0.0;
};

BinEdges fit_edges(std::span<const double> column);

// Equal-width bin of value within edges; out-of-range values clamp to the
// first/last bin and degenerate edges map to bin 0.
int bin_of(double value, BinEdges edges, int n_bins);

// Equal-width discretization over [min, max] of the column itself.
std::vector<int> discretize(std::span<const double> column, int n_bins);

// Empirical mutual information in bits; negative round-off is clamped to 0.
// Values may be any integers. Throws LengthMismatch or EmptyInput.
double mutual_information(std::span<const int> x, std::span<const int> y);

struct MiSelection {
  std::size_t input_dim = 0;
  int n_bins = 16;
  std::vector<double> scores;         // one per input feature, bits
  std::vector<std::size_t> selected;  // by descending score, ties to lower index
  std::vector<BinEdges> edges;        // training-set edges per input feature

  bool empty() const noexcept { return selected.empty(); }
};

// Univariate MI ranking of every column against the labels. Must be given
// training rows only. Throws KOutOfRange unless 1 <= k <= dims.
MiSelection select_top_k(const FeatureMatrix& matrix, std::size_t k, int n_bins,
                         std::size_t threads = 1);

// Gathers the selected features in stored order. Throws LengthMismatch.
std::vector<double> apply_selection(std::span<const double> vector, const MiSelection& selection);
FeatureMatrix apply_selection(const FeatureMatrix& matrix, const MiSelection& selection);

}  // namespace sonoclass
