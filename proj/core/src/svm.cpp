#include "sonoclass/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sonoclass/error.hpp"
#include "sonoclass/parallel.hpp"
#include "sonoclass/rng.hpp"

namespace sonoclass {
namespace {

constexpr double kTau = 1e-12;  // curvature floor for degenerate pairs
constexpr double kInf = std::numeric_limits<double>::infinity();

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

bool in_up(double alpha, int y, double c) {
  return (y > 0 && alpha < c) || (y < 0 && alpha > 0.0);
}
bool in_low(double alpha, int y, double c) {
  return (y > 0 && alpha > 0.0) || (y < 0 && alpha < c);
}

void check_binary_labels(std::span<const int> y) {
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw Error(Errc::kInvalidArgument, "binary labels must be -1 or +1");
  }
  if (!pos || !neg) throw Error(Errc::kSingleClassInput, "both classes must be present");
}

// Tallies pair decisions into an OvoDecision.
OvoDecision vote(std::span<const PairModel> pairs, std::span<const double> values,
                 const std::vector<int>& classes) {
  const std::size_t k = classes.size();
  OvoDecision d;
  d.votes.assign(k, 0);
  d.margins.assign(k, 0.0);
  d.pair_values.assign(values.begin(), values.end());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double v = values[p];
    ++d.votes[v > 0.0 ? pairs[p].class_a : pairs[p].class_b];
    d.margins[pairs[p].class_a] += std::abs(v);
    d.margins[pairs[p].class_b] += std::abs(v);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < k; ++c) {
    if (d.votes[c] > d.votes[best] ||
        (d.votes[c] == d.votes[best] && d.margins[c] > d.margins[best])) {
      best = c;
    }
  }
  d.label = classes[best];
  return d;
}

std::vector<PairModel> pair_skeleton(std::size_t k) {
  std::vector<PairModel> pairs;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) pairs.push_back({a, b, {}});
  }
  return pairs;
}

std::vector<int> sorted_classes(std::span<const int> labels) {
  std::vector<int> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

std::size_t class_index(const std::vector<int>& classes, int label) {
  return static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), label) -
                                  classes.begin());
}

}  // namespace

double KernelParams::sigma() const { return std::sqrt(1.0 / (2.0 * gamma)); }

void KernelParams::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(Errc::kInvalidArgument, "gamma must be positive and finite");
  }
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw Error(Errc::kInvalidArgument, "C must be positive and finite");
  }
}

double rbf_kernel(std::span<const double> x, std::span<const double> x2, double gamma) {
  if (x.size() != x2.size()) {
    throw Error(Errc::kLengthMismatch, "kernel arguments differ in length");
  }
  return std::exp(-gamma * squared_distance(x, x2));
}

RealMatrix rbf_gram(const RealMatrix& x, double gamma) {
  const std::size_t n = x.rows();
  RealMatrix k(n, n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::exp(-gamma * squared_distance(x.row(i), x.row(j)));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

double dual_objective(const RealMatrix& kernel, std::span<const int> y,
                      std::span<const double> alpha) {
  const std::size_t n = alpha.size();
  double linear = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    linear += alpha[i];
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      quad += y[i] * y[j] * alpha[i] * alpha[j] * kernel(i, j);
    }
  }
  return linear - 0.5 * quad;
}

SmoSolution smo_solve(const RealMatrix& kernel, std::span<const int> y, double c,
                      const SmoOptions& options) {
  const std::size_t n = y.size();
  if (kernel.rows() != n || kernel.cols() != n) {
    throw Error(Errc::kLengthMismatch, "kernel matrix does not match label count");
  }
  if (n < 2) throw Error(Errc::kSingleClassInput, "need at least two samples");
  check_binary_labels(y);
  if (!(c > 0.0)) throw Error(Errc::kInvalidArgument, "C must be positive");

  SmoSolution sol;
  std::vector<double>& a = sol.alpha;
  a.assign(n, 0.0);
  // Gradient of the minimization form 1/2 a'Qa - e'a, Q_ij = y_i y_j K_ij.
  std::vector<double> grad(n, -1.0);
  const std::size_t max_iter = std::max<std::size_t>(1, options.max_passes) * std::max<std::size_t>(n, 10);

  auto q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * kernel(i, j); };

  while (true) {
    // Working set selection.
    double gmax = -kInf;
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(a[t], y[t], c) && -y[t] * grad[t] > gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    }
    double gmax2 = -kInf;
    double best_gain = kInf;
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(a[t], y[t], c)) continue;
      const double yg = y[t] * grad[t];
      gmax2 = std::max(gmax2, yg);
      if (i == n) continue;
      const double grad_diff = gmax + yg;
      if (grad_diff > 0.0) {
        double quad = kernel(i, i) + kernel(t, t) - 2.0 * kernel(i, t);
        if (quad <= 0.0) quad = kTau;
        const double gain = -(grad_diff * grad_diff) / quad;
        if (gain < best_gain) {
          best_gain = gain;
          j = t;
        }
      }
    }
    if (i == n || j == n || gmax + gmax2 <= options.tol) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= max_iter) break;
    ++sol.iterations;

    const double old_ai = a[i];
    const double old_aj = a[j];
    if (y[i] != y[j]) {
      double quad = kernel(i, i) + kernel(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0.0) {
        if (a[j] < 0.0) { a[j] = 0.0; a[i] = diff; }
      } else {
        if (a[i] < 0.0) { a[i] = 0.0; a[j] = -diff; }
      }
      if (diff > 0.0) {
        if (a[i] > c) { a[i] = c; a[j] = c - diff; }
      } else {
        if (a[j] > c) { a[j] = c; a[i] = c + diff; }
      }
    } else {
      double quad = kernel(i, i) + kernel(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > c) {
        if (a[i] > c) { a[i] = c; a[j] = sum - c; }
      } else {
        if (a[j] < 0.0) { a[j] = 0.0; a[i] = sum; }
      }
      if (sum > c) {
        if (a[j] > c) { a[j] = c; a[i] = sum - c; }
      } else {
        if (a[i] < 0.0) { a[i] = 0.0; a[j] = sum; }
      }
    }
    const double dai = a[i] - old_ai;
    const double daj = a[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * dai + q(t, j) * daj;

    if (options.on_update) {
      double w = 0.0;
      for (std::size_t t = 0; t < n; ++t) w += a[t] * (1.0 - grad[t]);
      options.on_update(0.5 * w);
    }
  }

  // Bias from the KKT conditions.
  double free_sum = 0.0;
  std::size_t free_count = 0;
  double lower = -kInf, upper = kInf;
  for (std::size_t t = 0; t < n; ++t) {
    const double v = -y[t] * grad[t];
    if (a[t] > 0.0 && a[t] < c) {
      free_sum += v;
      ++free_count;
    } else if ((a[t] == 0.0 && y[t] > 0) || (a[t] == c && y[t] < 0)) {
      lower = std::max(lower, v);
    } else {
      upper = std::min(upper, v);
    }
  }
  if (free_count > 0) {
    sol.bias = free_sum / static_cast<double>(free_count);
  } else if (std::isfinite(lower) && std::isfinite(upper)) {
    sol.bias = 0.5 * (lower + upper);
  } else {
    sol.bias = std::isfinite(lower) ? lower : (std::isfinite(upper) ? upper : 0.0);
  }
  double w = 0.0;
  for (std::size_t t = 0; t < n; ++t) w += a[t] * (1.0 - grad[t]);
  sol.objective = 0.5 * w;
  return sol;
}

BinarySvmModel smo_train(const RealMatrix& x, std::span<const int> y, const KernelParams& params,
                         const SmoOptions& options) {
  params.validate();
  if (x.rows() != y.size()) {
    throw Error(Errc::kLengthMismatch, "sample count does not match label count");
  }
  const RealMatrix kernel = rbf_gram(x, params.gamma);
  const SmoSolution sol = smo_solve(kernel, y, params.c, options);

  BinarySvmModel model;
  model.params = params;
  model.bias = sol.bias;
  model.converged = sol.converged;
  model.iterations = sol.iterations;
  std::size_t n_sv = 0;
  for (double a : sol.alpha) n_sv += a > 0.0 ? 1 : 0;
  model.support_vectors = RealMatrix(n_sv, x.cols());
  std::size_t r = 0;
  for (std::size_t i = 0; i < sol.alpha.size(); ++i) {
    if (sol.alpha[i] <= 0.0) continue;
    std::copy(x.row(i).begin(), x.row(i).end(), model.support_vectors.row(r).begin());
    model.dual_weights.push_back(sol.alpha[i] * y[i]);
    ++r;
  }
  return model;
}

double decision_value(const BinarySvmModel& model, std::span<const double> x) {
  if (model.support_vectors.rows() > 0 && x.size() != model.support_vectors.cols()) {
    throw Error(Errc::kLengthMismatch, "input dimension " + std::to_string(x.size()) +
                                           " != model dimension " +
                                           std::to_string(model.support_vectors.cols()));
  }
  double f = model.bias;
  for (std::size_t i = 0; i < model.dual_weights.size(); ++i) {
    f += model.dual_weights[i] *
         std::exp(-model.params.gamma * squared_distance(x, model.support_vectors.row(i)));
  }
  return f;
}

MinMaxScaler MinMaxScaler::fit(const RealMatrix& x) {
  MinMaxScaler s;
  s.lo.assign(x.cols(), kInf);
  s.hi.assign(x.cols(), -kInf);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (std::size_t c = 0; c < x.cols(); ++c) {
      s.lo[c] = std::min(s.lo[c], row[c]);
      s.hi[c] = std::max(s.hi[c], row[c]);
    }
  }
  if (x.rows() == 0) {
    std::fill(s.lo.begin(), s.lo.end(), 0.0);
    std::fill(s.hi.begin(), s.hi.end(), 0.0);
  }
  return s;
}

void MinMaxScaler::transform_in_place(std::span<double> x) const {
  if (x.size() != lo.size()) {
    throw Error(Errc::kLengthMismatch, "scaler dimension does not match input");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double range = hi[i] - lo[i];
    x[i] = range > 0.0 ? (x[i] - lo[i]) / range : 0.0;
  }
}

RealMatrix MinMaxScaler::transform(const RealMatrix& x) const {
  RealMatrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) transform_in_place(out.row(r));
  return out;
}

std::size_t OvoModel::input_dim() const noexcept {
  return selection.empty() ? scaler.dims() : selection.input_dim;
}

bool OvoModel::converged() const noexcept {
  return std::all_of(pairs.begin(), pairs.end(), [](const PairModel& p) { return p.model.converged; });
}

OvoModel ovo_train(const FeatureMatrix& matrix, const KernelParams& params,
                   const OvoOptions& options, std::optional<MiSelection> selection) {
  params.validate();
  matrix.validate();
  OvoModel model;
  model.classes = sorted_classes(matrix.labels);
  const std::size_t k = model.classes.size();
  if (k < 2) throw Error(Errc::kClassTooSmall, "one-against-one needs at least two classes");
  std::vector<std::size_t> counts(k, 0);
  for (int l : matrix.labels) ++counts[class_index(model.classes, l)];
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] < 2) {
      throw Error(Errc::kClassTooSmall,
                  "class " + std::to_string(model.classes[c]) + " has fewer than 2 samples");
    }
  }

  RealMatrix x;
  if (selection && !selection->empty()) {
    x = apply_selection(matrix, *selection).values;
    model.selection = std::move(*selection);
  } else {
    x = matrix.values;
  }
  model.scaler = MinMaxScaler::fit(x);
  x = model.scaler.transform(x);

  model.pairs = pair_skeleton(k);
  parallel_for(model.pairs.size(), options.threads, [&](std::size_t p) {
    PairModel& pm = model.pairs[p];
    std::vector<std::size_t> rows;
    std::vector<int> y;
    for (std::size_t r = 0; r < matrix.samples(); ++r) {
      const std::size_t ci = class_index(model.classes, matrix.labels[r]);
      if (ci == pm.class_a || ci == pm.class_b) {
        rows.push_back(r);
        y.push_back(ci == pm.class_a ? 1 : -1);
      }
    }
    RealMatrix sub(rows.size(), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::copy(x.row(rows[i]).begin(), x.row(rows[i]).end(), sub.row(i).begin());
    }
    pm.model = smo_train(sub, y, params, options.smo);
  });
  return model;
}

OvoDecision ovo_decide(const OvoModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim()) {
    throw Error(Errc::kLengthMismatch, "input dimension " + std::to_string(x.size()) +
                                           " != model input dimension " +
                                           std::to_string(model.input_dim()));
  }
  std::vector<double> v = model.selection.empty()
                              ? std::vector<double>(x.begin(), x.end())
                              : apply_selection(x, model.selection);
  model.scaler.transform_in_place(v);
  std::vector<double> values(model.pairs.size());
  for (std::size_t p = 0; p < model.pairs.size(); ++p) {
    values[p] = decision_value(model.pairs[p].model, v);
  }
  return vote(model.pairs, values, model.classes);
}

int ovo_predict(const OvoModel& model, std::span<const double> x) {
  return ovo_decide(model, x).label;
}

std::vector<double> log2_grid(int lo, int hi, int step) {
  if (step <= 0 || hi < lo) throw Error(Errc::kInvalidArgument, "bad log2 grid range");
  std::vector<double> out;
  for (int e = lo; e <= hi; e += step) out.push_back(std::ldexp(1.0, e));
  return out;
}

std::vector<double> default_c_grid() { return log2_grid(-5, 15, 2); }
std::vector<double> default_gamma_grid() { return log2_grid(-15, 3, 2); }

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds,
                                          std::uint64_t seed) {
  const auto classes = sorted_classes(labels);
  std::vector<std::size_t> fold(labels.size(), 0);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t r = 0; r < labels.size(); ++r) {
      if (labels[r] == classes[c]) members.push_back(r);
    }
    Rng rng(mix_seed(seed, c));
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i) fold[members[i]] = i % folds;
  }
  return fold;
}

namespace {

struct FoldData {
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  RealMatrix train_dist;  // squared distances among scaled training rows
  RealMatrix cross_dist;  // test x train
};

}  // namespace

GridSearchResult grid_search_cv(const FeatureMatrix& matrix, std::span<const double> c_grid,
                                std::span<const double> gamma_grid, std::size_t folds,
                                std::uint64_t seed, const OvoOptions& options) {
  matrix.validate();
  if (folds < 2) throw Error(Errc::kInvalidArgument, "cross-validation needs at least 2 folds");
  if (c_grid.empty() || gamma_grid.empty()) {
    throw Error(Errc::kInvalidArgument, "empty parameter grid");
  }
  for (double c : c_grid) KernelParams{1.0, c}.validate();
  for (double g : gamma_grid) KernelParams{g, 1.0}.validate();

  const auto classes = sorted_classes(matrix.labels);
  const std::size_t k = classes.size();
  if (k < 2) throw Error(Errc::kInsufficientClassSize, "need at least two classes");
  std::vector<std::size_t> counts(k, 0);
  std::vector<std::size_t> label_index(matrix.samples());
  for (std::size_t r = 0; r < matrix.samples(); ++r) {
    label_index[r] = class_index(classes, matrix.labels[r]);
    ++counts[label_index[r]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] < folds) {
      throw Error(Errc::kInsufficientClassSize,
                  "class " + std::to_string(classes[c]) + " has " + std::to_string(counts[c]) +
                      " samples, fewer than " + std::to_string(folds) + " folds");
    }
  }

  const auto fold_of = stratified_folds(matrix.labels, folds, seed);
  std::vector<FoldData> data(folds);
  parallel_for(folds, options.threads, [&](std::size_t f) {
    FoldData& d = data[f];
    for (std::size_t r = 0; r < matrix.samples(); ++r) {
      (fold_of[r] == f ? d.test_rows : d.train_rows).push_back(r);
    }
    RealMatrix train(d.train_rows.size(), matrix.dims());
    for (std::size_t i = 0; i < d.train_rows.size(); ++i) {
      const auto src = matrix.values.row(d.train_rows[i]);
      std::copy(src.begin(), src.end(), train.row(i).begin());
    }
    const MinMaxScaler scaler = MinMaxScaler::fit(train);
    train = scaler.transform(train);
    RealMatrix test(d.test_rows.size(), matrix.dims());
    for (std::size_t i = 0; i < d.test_rows.size(); ++i) {
      const auto src = matrix.values.row(d.test_rows[i]);
      std::copy(src.begin(), src.end(), test.row(i).begin());
      scaler.transform_in_place(test.row(i));
    }
    const std::size_t n = train.rows();
    d.train_dist = RealMatrix(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v = squared_distance(train.row(i), train.row(j));
        d.train_dist(i, j) = v;
        d.train_dist(j, i) = v;
      }
    }
    d.cross_dist = RealMatrix(test.rows(), n);
    for (std::size_t i = 0; i < test.rows(); ++i) {
      for (std::size_t j = 0; j < n; ++j) d.cross_dist(i, j) = squared_distance(test.row(i), train.row(j));
    }
  });

  const auto skeleton = pair_skeleton(k);
  GridSearchResult result;
  for (double c : c_grid) {
    for (double g : gamma_grid) result.table.push_back({c, g, 0.0});
  }

  parallel_for(result.table.size(), options.threads, [&](std::size_t cell_index) {
    CvCell& cell = result.table[cell_index];
    const double c = cell.c;
    const double g = cell.gamma;
    std::size_t correct = 0;
    for (const FoldData& d : data) {
      const std::size_t n_test = d.test_rows.size();
      RealMatrix pair_values(n_test, skeleton.size(), 0.0);
      for (std::size_t p = 0; p < skeleton.size(); ++p) {
        std::vector<std::size_t> members;
        std::vector<int> y;
        for (std::size_t i = 0; i < d.train_rows.size(); ++i) {
          const std::size_t ci = label_index[d.train_rows[i]];
          if (ci == skeleton[p].class_a || ci == skeleton[p].class_b) {
            members.push_back(i);
            y.push_back(ci == skeleton[p].class_a ? 1 : -1);
          }
        }
        RealMatrix kernel(members.size(), members.size());
        for (std::size_t a = 0; a < members.size(); ++a) {
          for (std::size_t b = 0; b < members.size(); ++b) {
            kernel(a, b) = std::exp(-g * d.train_dist(members[a], members[b]));
          }
        }
        const SmoSolution sol = smo_solve(kernel, y, c, options.smo);
        for (std::size_t t = 0; t < n_test; ++t) {
          double f = sol.bias;
          for (std::size_t a = 0; a < members.size(); ++a) {
            if (sol.alpha[a] > 0.0) {
              f += sol.alpha[a] * y[a] * std::exp(-g * d.cross_dist(t, members[a]));
            }
          }
          pair_values(t, p) = f;
        }
      }
      for (std::size_t t = 0; t < n_test; ++t) {
        const OvoDecision dec = vote(skeleton, pair_values.row(t), classes);
        if (dec.label == matrix.labels[d.test_rows[t]]) ++correct;
      }
    }
    cell.accuracy = static_cast<double>(correct) / static_cast<double>(matrix.samples());
  });

  // Grid order is C ascending-as-given; prefer smaller C, then smaller gamma.
  const CvCell* best = nullptr;
  for (const CvCell& cell : result.table) {
    if (best == nullptr || cell.accuracy > best->accuracy ||
        (cell.accuracy == best->accuracy &&
         (cell.c < best->c || (cell.c == best->c && cell.gamma < best->gamma)))) {
      best = &cell;
    }
  }
  result.best = {best->gamma, best->c};
  result.best_accuracy = best->accuracy;
  return result;
}

}  // namespace sonoclass
