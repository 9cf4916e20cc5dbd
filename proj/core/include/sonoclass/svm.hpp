#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sonoclass/feature_select.hpp"
#include "sonoclass/matrix.hpp"

namespace sonoclass {

/// RBF width and box constraint. gamma = 1 / (2 sigma^2).
struct KernelParams {
  double gamma = 1.0;
  double c = 1.0;

  double sigma() const;
  void validate() const;
};

// exp(-gamma ||x - x2||^2). Throws LengthMismatch.
double rbf_kernel(std::span<const double> x, std::span<const double> x2, double gamma);

// Full symmetric kernel matrix of the rows of x.
RealMatrix rbf_gram(const RealMatrix& x, double gamma);

struct SmoOptions {
  // Stopping tolerance on the maximal KKT violation: on return every training
  // point satisfies its KKT condition on y f(x) to within tol.
  double tol = 1e-3;
  // Pair updates are capped at max_passes * n_samples.
  std::size_t max_passes = 1000;
  // Called with the dual objective after every pair update (tests use it to
  // check monotone ascent).
  std::function<void(double)> on_update;
};

struct SmoSolution {
  std::vector<double> alpha;
  double bias = 0.0;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Dual objective sum(alpha) - 1/2 sum_ij y_i y_j alpha_i alpha_j K_ij.
double dual_objective(const RealMatrix& kernel, std::span<const int> y,
                      std::span<const double> alpha);

/// SMO on a precomputed kernel matrix with labels in {-1, +1}.
///
/// Each step picks the maximal violator i and, among the opposing violators,
/// the j with the largest second-order gain, then solves the two-variable
/// subproblem analytically and clips to the box, so sum(alpha y) = 0 and
/// 0 <= alpha <= C hold after every step. Stops when the violation gap is at
/// most tol or the update cap is hit (converged = false). The bias is the
/// mean of -y_i grad_i over free multipliers, else the midpoint of the
/// feasible interval.
SmoSolution smo_solve(const RealMatrix& kernel, std::span<const int> y, double c,
                      const SmoOptions& options = {});

struct BinarySvmModel {
  RealMatrix support_vectors;         // rows with alpha > 0
  std::vector<double> dual_weights;   // alpha_i * y_i
  double bias = 0.0;
  KernelParams params;
  bool converged = true;
  std::size_t iterations = 0;
};

// Throws SingleClassInput when a class is missing, LengthMismatch on shape
// errors, InvalidArgument for labels outside {-1, +1}.
BinarySvmModel smo_train(const RealMatrix& x, std::span<const int> y, const KernelParams& params,
                         const SmoOptions& options = {});

// sum (alpha_i y_i) k(x, sv_i) + b. Throws LengthMismatch.
double decision_value(const BinarySvmModel& model, std::span<const double> x);

struct MinMaxScaler {
  std::vector<double> lo;
  std::vector<double> hi;

  static MinMaxScaler fit(const RealMatrix& x);
  std::size_t dims() const noexcept { return lo.size(); }
  // (v - lo) / (hi - lo); constant features map to 0.
  void transform_in_place(std::span<double> x) const;
  RealMatrix transform(const RealMatrix& x) const;
};

struct PairModel {
  std::size_t class_a = 0;  // index into OvoModel::classes, votes on f(x) > 0
  std::size_t class_b = 0;
  BinarySvmModel model;
};

/// One-against-one ensemble. Prediction takes raw feature vectors: the MI
/// selection (when present) and the min-max scaler are applied first.
struct OvoModel {
  std::vector<int> classes;  // sorted label values
  std::vector<PairModel> pairs;  // (0,1), (0,2), ..., (k-2,k-1)
  MiSelection selection;         // empty selection = identity
  MinMaxScaler scaler;

  std::size_t input_dim() const noexcept;
  bool converged() const noexcept;
};

struct OvoOptions {
  SmoOptions smo;
  std::size_t threads = 1;
};

// Trains k(k-1)/2 binary models on the raw matrix. When a selection is given
// it is applied to the matrix before scaling. Throws ClassTooSmall unless
// every class has at least 2 rows and there are at least 2 classes.
OvoModel ovo_train(const FeatureMatrix& matrix, const KernelParams& params,
                   const OvoOptions& options = {}, std::optional<MiSelection> selection = {});

struct OvoDecision {
  int label = 0;
  std::vector<int> votes;        // per class index
  std::vector<double> margins;   // sum of |f| over pairs the class takes part in
  std::vector<double> pair_values;
};

// Majority vote; ties go to the largest margin sum, then the lowest class
// index.
OvoDecision ovo_decide(const OvoModel& model, std::span<const double> x);
int ovo_predict(const OvoModel& model, std::span<const double> x);

struct CvCell {
  double c = 0.0;
  double gamma = 0.0;
  double accuracy = 0.0;  // fraction of held-out rows predicted correctly
};

struct GridSearchResult {
  KernelParams best;
  double best_accuracy = 0.0;
  std::vector<CvCell> table;  // grid order: C outer, gamma inner
};

// 2^lo, 2^(lo+step), ..., up to 2^hi.
std::vector<double> log2_grid(int lo, int hi, int step);
std::vector<double> default_c_grid();      // 2^-5 .. 2^15 step 2^2
std::vector<double> default_gamma_grid();  // 2^-15 .. 2^3 step 2^2

// Stratified k-fold CV accuracy of the OvO model at every (C, gamma); the
// scaler is refit on each training fold. Best = highest accuracy, ties to
// smaller C then smaller gamma. Throws InsufficientClassSize when a class
// has fewer rows than folds.
GridSearchResult grid_search_cv(const FeatureMatrix& matrix, std::span<const double> c_grid,
                                std::span<const double> gamma_grid, std::size_t folds,
                                std::uint64_t seed, const OvoOptions& options = {});

// Fold index per row: each class is shuffled with the seed and dealt
// round-robin.
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds,
                                          std::uint64_t seed);

}  // namespace sonoclass
