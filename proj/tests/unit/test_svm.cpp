#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "../oracles/oracles.hpp"
#include "../support.hpp"
#include "sonoclass/error.hpp"
#include "sonoclass/svm.hpp"

using namespace sonoclass;

namespace {

struct Problem {
  RealMatrix x;
  std::vector<int> y;
};

Problem random_problem(Rng& rng, std::size_t n, std::size_t d) {
  Problem p{RealMatrix(n, d), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    p.y[i] = i % 2 == 0 ? 1 : -1;
    for (std::size_t k = 0; k < d; ++k) p.x(i, k) = rng.normal() + 0.6 * p.y[i];
  }
  return p;
}

// y_i f(x_i) for every training point from the dual solution.
std::vector<double> margins(const RealMatrix& kernel, std::span<const int> y, const SmoSolution& s) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    double f = s.bias;
    for (std::size_t j = 0; j < y.size(); ++j) f += s.alpha[j] * y[j] * kernel(i, j);
    out[i] = y[i] * f;
  }
  return out;
}

FeatureMatrix blobs(std::size_t k, std::size_t per_class, double spread, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix m;
  m.values = RealMatrix(k * per_class, 2);
  for (std::size_t c = 0; c < k; ++c) {
    const double angle = 2.0 * 3.141592653589793 * static_cast<double>(c) / static_cast<double>(k);
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t r = c * per_class + i;
      m.values(r, 0) = 10.0 * std::cos(angle) + spread * rng.normal();
      m.values(r, 1) = 10.0 * std::sin(angle) + spread * rng.normal();
      m.labels.push_back(static_cast<int>(c));
    }
  }
  return m;
}

// Model whose pair decision values are exactly the given constants.
OvoModel constant_model(std::size_t k, const std::vector<double>& values) {
  OvoModel m;
  m.scaler.lo = {0.0};
  m.scaler.hi = {1.0};
  std::size_t p = 0;
  for (std::size_t a = 0; a < k; ++a) {
    m.classes.push_back(static_cast<int>(a));
    for (std::size_t b = a + 1; b < k; ++b) {
      PairModel pm;
      pm.class_a = a;
      pm.class_b = b;
      pm.model.support_vectors = RealMatrix(0, 1);
      pm.model.bias = values[p++];
      m.pairs.push_back(pm);
    }
  }
  return m;
}

}  // namespace

TEST(RbfKernel, Examples) {
  const std::vector<double> a{0.0, 0.0}, b{1.0, 1.0};
  EXPECT_DOUBLE_EQ(rbf_kernel(a, a, 0.7), 1.0);
  EXPECT_NEAR(rbf_kernel(a, b, 0.5), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(rbf_kernel(a, b, 0.5), 0.36787944117144233, 1e-15);
  EXPECT_EQ(rbf_kernel(a, b, 0.5), rbf_kernel(b, a, 0.5));
  EXPECT_THROW(rbf_kernel(a, std::vector<double>{1.0}, 1.0), Error);
  KernelParams p{0.125, 1.0};
  EXPECT_NEAR(p.sigma(), 2.0, 1e-15);
}

TEST(Smo, TwoPointClosedForm) {
  for (double c : {0.1, 1.0, 100.0}) {
    for (double gamma : {0.1, 1.0}) {
      RealMatrix x(2, 1);
      x(1, 0) = 1.0;
      const std::vector<int> y{1, -1};
      const RealMatrix kernel = rbf_gram(x, gamma);
      const SmoSolution s = smo_solve(kernel, y, c, {1e-10, 1000, {}});
      const double expected = std::min(c, 1.0 / (1.0 - kernel(0, 1)));
      EXPECT_NEAR(s.alpha[0], expected, 1e-9);
      EXPECT_NEAR(s.alpha[1], expected, 1e-9);
      EXPECT_NEAR(s.bias, 0.0, 1e-9);
      EXPECT_TRUE(s.converged);
    }
  }
}

TEST(Smo, MatchesDenseQpOracle) {
  Rng rng(99);
  for (int t = 0; t < 25; ++t) {
    const Problem p = random_problem(rng, 8, 2);
    const double c = std::exp(rng.uniform(std::log(0.1), std::log(50.0)));
    const RealMatrix kernel = rbf_gram(p.x, rng.uniform(0.1, 2.0));
    const SmoSolution s = smo_solve(kernel, p.y, c, {1e-9, 10000, {}});
    const oracle::QpSolution q = oracle::dense_svm_dual(kernel, p.y, c);
    ASSERT_TRUE(s.converged);
    EXPECT_NEAR(s.objective, q.objective, 1e-7 * std::max(1.0, std::abs(q.objective)));
    EXPECT_NEAR(s.objective, oracle::dual_value(kernel, p.y, s.alpha), 1e-9);
  }
}

TEST(Smo, FeasibleAndMonotoneAfterEveryStep) {
  Rng rng(5);
  const Problem p = random_problem(rng, 30, 3);
  const RealMatrix kernel = rbf_gram(p.x, 0.5);
  std::vector<double> trace;
  SmoOptions opts{1e-6, 1000, [&](double w) { trace.push_back(w); }};
  const SmoSolution s = smo_solve(kernel, p.y, 2.0, opts);
  ASSERT_FALSE(trace.empty());
  EXPECT_GE(trace.front(), 0.0);
  for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_GE(trace[i], trace[i - 1] - 1e-12);
  double balance = 0.0;
  for (std::size_t i = 0; i < s.alpha.size(); ++i) {
    EXPECT_GE(s.alpha[i], 0.0);
    EXPECT_LE(s.alpha[i], 2.0);
    balance += s.alpha[i] * p.y[i];
  }
  EXPECT_NEAR(balance, 0.0, 1e-12);
  EXPECT_EQ(trace.back(), s.objective);
}

TEST(Smo, KktResidualsWithinTolerance) {
  Rng rng(17);
  for (double tol : {1e-3, 1e-6}) {
    const Problem p = random_problem(rng, 40, 2);
    const double c = 4.0;
    const RealMatrix kernel = rbf_gram(p.x, 1.0);
    const SmoSolution s = smo_solve(kernel, p.y, c, {tol, 1000, {}});
    ASSERT_TRUE(s.converged);
    const auto m = margins(kernel, p.y, s);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (s.alpha[i] <= 0.0) {
        EXPECT_GE(m[i], 1.0 - tol - 1e-12);
      } else if (s.alpha[i] >= c) {
        EXPECT_LE(m[i], 1.0 + tol + 1e-12);
      } else {
        EXPECT_NEAR(m[i], 1.0, tol + 1e-12);
      }
    }
  }
}

TEST(Smo, UpdateCapReportsNonConvergence) {
  Rng rng(8);
  const Problem p = random_problem(rng, 40, 2);
  const RealMatrix kernel = rbf_gram(p.x, 1.0);
  const SmoSolution s = smo_solve(kernel, p.y, 100.0, {1e-12, 0, {}});
  EXPECT_FALSE(s.converged);
}

TEST(SmoTrain, DecisionValueIsKernelSum) {
  Rng rng(3);
  const Problem p = random_problem(rng, 20, 3);
  const BinarySvmModel m = smo_train(p.x, p.y, {0.5, 3.0});
  ASSERT_EQ(m.support_vectors.rows(), m.dual_weights.size());
  const std::vector<double> probe{0.2, -0.4, 1.0};
  double f = m.bias;
  for (std::size_t i = 0; i < m.dual_weights.size(); ++i) {
    EXPECT_NE(m.dual_weights[i], 0.0);
    f += m.dual_weights[i] * rbf_kernel(probe, m.support_vectors.row(i), 0.5);
  }
  EXPECT_NEAR(decision_value(m, probe), f, 1e-12);
  EXPECT_THROW(decision_value(m, std::vector<double>{1.0}), Error);
}

TEST(SmoTrain, SeparableBlobsAreFit) {
  FeatureMatrix b = blobs(2, 20, 0.5, 4);
  std::vector<int> y(b.labels.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = b.labels[i] == 0 ? 1 : -1;
  const BinarySvmModel m = smo_train(b.values, y, {0.1, 10.0});
  for (std::size_t i = 0; i < y.size(); ++i) {
    EXPECT_GT(y[i] * decision_value(m, b.values.row(i)), 0.0);
  }
}

TEST(SmoTrain, RejectsBadLabels) {
  RealMatrix x(3, 1);
  try {
    smo_train(x, std::vector<int>{1, 1, 1}, {1.0, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kSingleClassInput);
  }
  EXPECT_THROW(smo_train(x, std::vector<int>{1, 2, -1}, {1.0, 1.0}), Error);
  EXPECT_THROW(smo_train(x, std::vector<int>{1, -1}, {1.0, 1.0}), Error);
}

TEST(Ovo, PairCountAndOrder) {
  const FeatureMatrix b10 = blobs(10, 4, 0.3, 1);
  const OvoModel m = ovo_train(b10, {0.5, 10.0});
  ASSERT_EQ(m.pairs.size(), 45u);
  std::size_t p = 0;
  for (std::size_t a = 0; a < 10; ++a) {
    for (std::size_t b = a + 1; b < 10; ++b, ++p) {
      EXPECT_EQ(m.pairs[p].class_a, a);
      EXPECT_EQ(m.pairs[p].class_b, b);
    }
  }
  EXPECT_EQ(ovo_train(blobs(2, 5, 0.3, 2), {0.5, 10.0}).pairs.size(), 1u);
  EXPECT_EQ(ovo_train(blobs(3, 5, 0.3, 2), {0.5, 10.0}).pairs.size(), 3u);
  for (std::size_t r = 0; r < b10.samples(); ++r) {
    EXPECT_EQ(ovo_predict(m, b10.values.row(r)), b10.labels[r]);
  }
}

TEST(Ovo, TieBreakMatchesOracle) {
  const std::vector<double> x{0.5};
  // Cyclic three-way tie: 0 beats 1, 1 beats 2, 2 beats 0. Margin sums are
  // 1.3, 0.6 and 1.1.
  const std::vector<double> cyclic{0.4, -0.9, 0.2};
  const OvoDecision d = ovo_decide(constant_model(3, cyclic), x);
  EXPECT_EQ(d.votes, (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(d.label, oracle::ovo_vote(3, cyclic));
  EXPECT_EQ(d.label, 0);
  EXPECT_EQ(ovo_decide(constant_model(3, {0.1, -0.3, 0.9}), x).label, 2);
  // Exact margin tie falls back to the lowest index.
  const std::vector<double> flat{1.0, -1.0, 1.0};
  EXPECT_EQ(ovo_decide(constant_model(3, flat), x).label, 0);
  Rng rng(12);
  for (int t = 0; t < 500; ++t) {
    const std::size_t k = 2 + rng.uniform_index(5);
    std::vector<double> v(k * (k - 1) / 2);
    for (double& e : v) e = rng.uniform(-1.0, 1.0);
    EXPECT_EQ(ovo_decide(constant_model(k, v), x).label, oracle::ovo_vote(k, v));
  }
}

TEST(Ovo, RowOrderDoesNotChangePredictions) {
  FeatureMatrix b = blobs(3, 8, 2.5, 6);
  const OvoModel m1 = ovo_train(b, {0.2, 4.0}, {{1e-8, 1000, {}}, 1});
  std::vector<std::size_t> perm(b.samples());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(1);
  rng.shuffle(perm);
  FeatureMatrix shuffled;
  shuffled.values = RealMatrix(b.samples(), b.dims());
  for (std::size_t r = 0; r < perm.size(); ++r) {
    for (std::size_t c = 0; c < b.dims(); ++c) shuffled.values(r, c) = b.values(perm[r], c);
    shuffled.labels.push_back(b.labels[perm[r]]);
  }
  const OvoModel m2 = ovo_train(shuffled, {0.2, 4.0}, {{1e-8, 1000, {}}, 1});
  Rng probe(2);
  for (int t = 0; t < 200; ++t) {
    const std::vector<double> x{probe.uniform(-14, 14), probe.uniform(-14, 14)};
    const auto d1 = ovo_decide(m1, x);
    const auto d2 = ovo_decide(m2, x);
    for (std::size_t p = 0; p < d1.pair_values.size(); ++p) {
      EXPECT_NEAR(d1.pair_values[p], d2.pair_values[p], 1e-5);
    }
  }
}

TEST(Ovo, ThreadCountDoesNotChangeModel) {
  const FeatureMatrix b = blobs(4, 6, 1.0, 9);
  const OvoModel a = ovo_train(b, {0.5, 2.0}, {{1e-3, 1000, {}}, 1});
  const OvoModel c = ovo_train(b, {0.5, 2.0}, {{1e-3, 1000, {}}, 3});
  ASSERT_EQ(a.pairs.size(), c.pairs.size());
  for (std::size_t p = 0; p < a.pairs.size(); ++p) {
    EXPECT_EQ(a.pairs[p].model.dual_weights, c.pairs[p].model.dual_weights);
    EXPECT_EQ(a.pairs[p].model.bias, c.pairs[p].model.bias);
  }
}

TEST(Ovo, ClassTooSmall) {
  FeatureMatrix b = blobs(3, 2, 0.3, 1);
  b.labels.back() = 0;
  try {
    ovo_train(b, {1.0, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kClassTooSmall);
  }
}

TEST(Scaler, MapsTrainingRangeToUnit) {
  const RealMatrix x = testing_support::random_matrix(10, 3, 4, -5.0, 5.0);
  const MinMaxScaler s = MinMaxScaler::fit(x);
  const RealMatrix t = s.transform(x);
  for (std::size_t c = 0; c < 3; ++c) {
    double lo = 1e9, hi = -1e9;
    for (std::size_t r = 0; r < 10; ++r) {
      lo = std::min(lo, t(r, c));
      hi = std::max(hi, t(r, c));
    }
    EXPECT_NEAR(lo, 0.0, 1e-15);
    EXPECT_NEAR(hi, 1.0, 1e-15);
  }
  RealMatrix constant(4, 1, 3.0);
  EXPECT_EQ(MinMaxScaler::fit(constant).transform(constant), RealMatrix(4, 1, 0.0));
}

TEST(GridSearch, Grids) {
  EXPECT_EQ(default_c_grid().size(), 11u);
  EXPECT_EQ(default_gamma_grid().size(), 10u);
  EXPECT_EQ(default_c_grid().front(), 1.0 / 32.0);
  EXPECT_EQ(default_c_grid().back(), 32768.0);
  EXPECT_EQ(default_gamma_grid().front(), std::ldexp(1.0, -15));
  EXPECT_EQ(default_gamma_grid().back(), 8.0);
}

TEST(GridSearch, StratifiedFolds) {
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 10 + c; ++i) labels.push_back(c);
  }
  const auto folds = stratified_folds(labels, 5, 42);
  EXPECT_EQ(folds, stratified_folds(labels, 5, 42));
  for (int c = 0; c < 3; ++c) {
    std::vector<int> count(5, 0);
    for (std::size_t r = 0; r < labels.size(); ++r) {
      if (labels[r] == c) ++count[folds[r]];
    }
    const auto [mn, mx] = std::minmax_element(count.begin(), count.end());
    EXPECT_LE(*mx - *mn, 1);
  }
}

TEST(GridSearch, SinglePointAndTies) {
  const FeatureMatrix b = blobs(3, 10, 0.3, 3);
  const std::vector<double> one{2.0}, g{0.5};
  const GridSearchResult r = grid_search_cv(b, one, g, 5, 1);
  EXPECT_EQ(r.best.c, 2.0);
  EXPECT_EQ(r.best.gamma, 0.5);
  EXPECT_EQ(r.best_accuracy, 1.0);
  ASSERT_EQ(r.table.size(), 1u);
  const std::vector<double> cs{4.0, 4.0, 1.0}, gs{2.0, 1.0};
  const GridSearchResult t = grid_search_cv(b, cs, gs, 5, 1);
  ASSERT_EQ(t.table.size(), 6u);
  EXPECT_EQ(t.table[0].c, 4.0);
  EXPECT_EQ(t.table[1].gamma, 1.0);
  // All cells reach 1.0 on well separated blobs, so the smallest C and gamma win.
  EXPECT_EQ(t.best_accuracy, 1.0);
  EXPECT_EQ(t.best.c, 1.0);
  EXPECT_EQ(t.best.gamma, 1.0);
}

TEST(GridSearch, InsufficientClassSize) {
  const FeatureMatrix b = blobs(2, 3, 0.3, 3);
  const std::vector<double> one{1.0};
  try {
    grid_search_cv(b, one, one, 5, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kInsufficientClassSize);
  }
}
