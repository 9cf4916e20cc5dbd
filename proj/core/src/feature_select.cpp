#include "sonoclass/feature_select.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "sonoclass/error.hpp"
#include "sonoclass/parallel.hpp"

namespace sonoclass {

void FeatureMatrix::validate() const {
  if (labels.size() != values.rows()) {
    throw Error(Errc::kLengthMismatch, "label count " + std::to_string(labels.size()) +
                                           " != sample count " + std::to_string(values.rows()));
  }
  if (!feature_names.empty() && feature_names.size() != values.cols()) {
    throw Error(Errc::kLengthMismatch, "feature name count does not match dimension");
  }
  for (int l : labels) {
    if (l < 0) throw Error(Errc::kInvalidArgument, "labels must be non-negative");
  }
  for (double v : values.flat()) {
    if (!std::isfinite(v)) throw Error(Errc::kInvalidArgument, "non-finite feature value");
  }
}

BinEdges fit_edges(std::span<const double> column) {
  if (column.empty()) return {};
  const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
  return {*lo, *hi};
}

int bin_of(double value, BinEdges edges, int n_bins) {
  const double width = edges.hi - edges.lo;
  if (!(width > 0.0)) return 0;
  const double pos = (value - edges.lo) / width * n_bins;
  if (!(pos > 0.0)) return 0;
  return std::min(static_cast<int>(pos), n_bins - 1);
}

std::vector<int> discretize(std::span<const double> column, int n_bins) {
  if (n_bins < 2) throw Error(Errc::kInvalidArgument, "n_bins must be >= 2");
  const BinEdges edges = fit_edges(column);
  std::vector<int> out(column.size());
  for (std::size_t i = 0; i < column.size(); ++i) out[i] = bin_of(column[i], edges, n_bins);
  return out;
}

namespace {

// Maps arbitrary integers to dense codes 0..m-1 (in ascending value order).
std::vector<int> densify(std::span<const int> values, int& cardinality) {
  std::vector<int> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  cardinality = static_cast<int>(sorted.size());
  std::vector<int> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), values[i]) -
                              sorted.begin());
  }
  return out;
}

// MI from a dense contingency table of counts.
double mi_from_counts(std::span<const std::size_t> joint, std::size_t nx, std::size_t ny,
                      std::size_t total) {
  std::vector<std::size_t> px(nx, 0), py(ny, 0);
  for (std::size_t a = 0; a < nx; ++a) {
    for (std::size_t b = 0; b < ny; ++b) {
      px[a] += joint[a * ny + b];
      py[b] += joint[a * ny + b];
    }
  }
  const double n = static_cast<double>(total);
  std::vector<double> terms;
  for (std::size_t a = 0; a < nx; ++a) {
    for (std::size_t b = 0; b < ny; ++b) {
      const std::size_t c = joint[a * ny + b];
      if (c == 0) continue;
      const double pxy = static_cast<double>(c) / n;
      terms.push_back(pxy * std::log2(static_cast<double>(c) * n /
                                      (static_cast<double>(px[a]) * static_cast<double>(py[b]))));
    }
  }
  // Summing in sorted order makes the result independent of which variable
  // indexes the table rows, so I(X;Y) == I(Y;X) bit for bit.
  std::sort(terms.begin(), terms.end());
  double mi = 0.0;
  for (double t : terms) mi += t;
  return std::max(mi, 0.0);
}

}  // namespace

double mutual_information(std::span<const int> x, std::span<const int> y) {
  if (x.size() != y.size()) {
    throw Error(Errc::kLengthMismatch, "mutual information needs equal-length inputs");
  }
  if (x.empty()) throw Error(Errc::kEmptyInput, "mutual information of empty inputs");
  int nx = 0, ny = 0;
  const auto dx = densify(x, nx);
  const auto dy = densify(y, ny);
  std::vector<std::size_t> joint(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    ++joint[static_cast<std::size_t>(dx[i]) * static_cast<std::size_t>(ny) +
            static_cast<std::size_t>(dy[i])];
  }
  return mi_from_counts(joint, static_cast<std::size_t>(nx), static_cast<std::size_t>(ny),
                        x.size());
}

MiSelection select_top_k(const FeatureMatrix& matrix, std::size_t k, int n_bins,
                         std::size_t threads) {
  matrix.validate();
  const std::size_t dims = matrix.dims();
  if (k < 1 || k > dims) {
    throw Error(Errc::kKOutOfRange, "k = " + std::to_string(k) + " outside [1, " +
                                        std::to_string(dims) + "]");
  }
  if (n_bins < 2) throw Error(Errc::kInvalidArgument, "n_bins must be >= 2");

  int n_classes = 0;
  const auto labels = densify(matrix.labels, n_classes);
  if (n_classes < 2) {
    throw Error(Errc::kSingleClassInput, "feature selection needs at least two classes");
  }

  MiSelection sel;
  sel.input_dim = dims;
  sel.n_bins = n_bins;
  sel.scores.assign(dims, 0.0);
  sel.edges.assign(dims, {});
  const std::size_t rows = matrix.samples();
  const auto ny = static_cast<std::size_t>(n_classes);
  const auto nb = static_cast<std::size_t>(n_bins);

  constexpr std::size_t kBlock = 256;
  const std::size_t blocks = (dims + kBlock - 1) / kBlock;
  parallel_for(blocks, threads, [&](std::size_t block) {
    std::vector<double> column(rows);
    std::vector<std::size_t> joint(nb * ny);
    const std::size_t end = std::min(dims, (block + 1) * kBlock);
    for (std::size_t f = block * kBlock; f < end; ++f) {
      for (std::size_t r = 0; r < rows; ++r) column[r] = matrix.values(r, f);
      const BinEdges edges = fit_edges(column);
      std::fill(joint.begin(), joint.end(), 0);
      // Occupied bins only matter to MI, so the fixed n_bins x classes table
      // matches the sample-based estimator exactly.
      for (std::size_t r = 0; r < rows; ++r) {
        const auto b = static_cast<std::size_t>(bin_of(column[r], edges, n_bins));
        ++joint[b * ny + static_cast<std::size_t>(labels[r])];
      }
      sel.edges[f] = edges;
      sel.scores[f] = mi_from_counts(joint, nb, ny, rows);
    }
  });

  std::vector<std::size_t> order(dims);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sel.scores[a] > sel.scores[b];
  });
  order.resize(k);
  sel.selected = std::move(order);
  return sel;
}

std::vector<double> apply_selection(std::span<const double> vector, const MiSelection& selection) {
  if (vector.size() != selection.input_dim) {
    throw Error(Errc::kLengthMismatch, "vector length " + std::to_string(vector.size()) +
                                           " != selection input dimension " +
                                           std::to_string(selection.input_dim));
  }
  std::vector<double> out(selection.selected.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = vector[selection.selected[i]];
  return out;
}

FeatureMatrix apply_selection(const FeatureMatrix& matrix, const MiSelection& selection) {
  if (matrix.dims() != selection.input_dim) {
    throw Error(Errc::kLengthMismatch, "matrix dimension does not match selection");
  }
  FeatureMatrix out;
  out.labels = matrix.labels;
  out.values = RealMatrix(matrix.samples(), selection.selected.size());
  for (std::size_t r = 0; r < matrix.samples(); ++r) {
    const auto src = matrix.values.row(r);
    auto dst = out.values.row(r);
    for (std::size_t i = 0; i < selection.selected.size(); ++i) dst[i] = src[selection.selected[i]];
  }
  if (!matrix.feature_names.empty()) {
    for (std::size_t idx : selection.selected) out.feature_names.push_back(matrix.feature_names[idx]);
  }
  return out;
}

}  // namespace sonoclass
