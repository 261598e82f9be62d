#include <gtest/gtest.h>

#include <array>

#include "oracles.hpp"

using namespace ntknas;

namespace {

Dataset separable(Eigen::Index n, std::uint64_t seed) {
  SynthSpec s;
  s.N = n;
  s.d = 8;
  s.labels = LabelKind::linear_teacher;
  s.margin = 0.2;
  s.seed = seed;
  return generate(s);
}

SearchSpace small_space() {
  SearchSpace sp;
  sp.L = 3;
  sp.m = 16;
  sp.d = 8;
  return sp;
}

}  // namespace

TEST(Search, SampleRespectsPolicy) {
  std::mt19937_64 rng(1);
  SearchSpace sp;
  sp.skip_policy = SkipPolicy::all_on;
  sp.allowed = {ActivationTag::relu};
  for (int i = 0; i < 20; ++i) {
    const Architecture a = sample(sp, rng);
    for (int s : a.skips) EXPECT_EQ(s, 1);
    for (const auto& k : a.activations) EXPECT_EQ(k.tag, ActivationTag::relu);
  }
}

TEST(Search, SampleIsUniformOverKinds) {
  std::mt19937_64 rng(2);
  SearchSpace sp;
  std::vector<std::array<int, 5>> counts(sp.L - 1, std::array<int, 5>{});
  for (int i = 0; i < 10000; ++i) {
    const Architecture a = sample(sp, rng);
    for (int l = 0; l < sp.L - 1; ++l) ++counts[l][static_cast<int>(a.activations[l].tag)];
  }
  for (const auto& layer : counts)
    for (int c : layer) {
      EXPECT_GE(c / 10000.0, 0.17);
      EXPECT_LE(c / 10000.0, 0.23);
    }
}

TEST(Search, ScoreChainPerArchitecture) {
  const Eigen::MatrixXd X = oracle::sphere_points(24, 8, 3);
  std::mt19937_64 rng(4);
  SearchSpace sp = small_space();
  sp.L = 4;
  for (int i = 0; i < 5; ++i) {
    const Architecture a = sample(sp, rng);
    ScoreOptions o;
    o.seed = 10 + i;
    const double lo = eigen_nas_score(a, X, ScoreMode::min_eig_empirical, o);
    const double mid = eigen_nas_score(a, X, ScoreMode::trace_diag_empirical, o);
    const double hi = eigen_nas_score(a, X, ScoreMode::frobenius_empirical, o);
    EXPECT_LE(lo, mid);
    EXPECT_LE(mid, hi);
  }
}

TEST(Search, AnalyticScoreOrdering) {
  const Eigen::MatrixXd X = oracle::sphere_points(64, 16, 6);
  const Architecture relu = uniform_architecture(ActivationKind::relu(), 5, 1, 1, 16);
  const Architecture sig = uniform_architecture(ActivationKind::sigmoid(), 5, 0, 1, 16);
  const double a = eigen_nas_score(relu, X, ScoreMode::trace_diag_analytic);
  EXPECT_GT(a, eigen_nas_score(sig, X, ScoreMode::trace_diag_analytic));
  EXPECT_EQ(a, eigen_nas_score(relu, X, ScoreMode::trace_diag_analytic));
  EXPECT_NEAR(a, ntk_infinite(X, relu).K.trace() / 16, 1e-10 * a);
}

TEST(Search, ParseScoreMode) {
  EXPECT_EQ(parse_score_mode("frobenius"), ScoreMode::frobenius_empirical);
  EXPECT_EQ(parse_score_mode("eigen_nas"), ScoreMode::trace_diag_empirical);
  EXPECT_THROW(parse_score_mode("no_such_mode"), input_error);
}

TEST(Search, RankedOutputAndDeterminism) {
  const Dataset train = separable(64, 1);
  const Dataset val = separable(32, 2);
  SearchOptions o;
  o.budget = 2;
  o.gamma = 0.05;
  o.seed = 3;
  const SearchResult a = eigen_nas(small_space(), train, val, 10, 3, o);
  ASSERT_EQ(a.ranked.size(), 10u);
  int with_val = 0;
  for (std::size_t i = 0; i < a.ranked.size(); ++i) {
    EXPECT_EQ(a.ranked[i].rank, static_cast<int>(i + 1));
    if (i) EXPECT_GE(a.ranked[i - 1].score, a.ranked[i].score);
    if (a.ranked[i].val_accuracy) ++with_val;
  }
  EXPECT_EQ(with_val, 3);
  const SearchResult b = eigen_nas(small_space(), train, val, 10, 3, o);
  for (std::size_t i = 0; i < a.ranked.size(); ++i) {
    EXPECT_EQ(a.ranked[i].index, b.ranked[i].index);
    EXPECT_EQ(a.ranked[i].score, b.ranked[i].score);
  }
  o.threads = 3;
  const SearchResult c = eigen_nas(small_space(), train, val, 10, 3, o);
  EXPECT_EQ(a.best.index, c.best.index);
  EXPECT_EQ(a.best.val_accuracy, c.best.val_accuracy);
}

TEST(Search, DegenerateBudgets) {
  const Dataset train = separable(48, 5);
  const Dataset val = separable(24, 6);
  SearchOptions o;
  o.budget = 1;
  o.seed = 1;
  const SearchResult one = eigen_nas(small_space(), train, val, 1, 1, o);
  EXPECT_EQ(one.ranked.size(), 1u);
  EXPECT_EQ(one.best.index, one.ranked[0].index);
  const SearchResult all = eigen_nas(small_space(), train, val, 6, 6, o);
  for (const auto& c : all.ranked) EXPECT_GE(*all.best.val_accuracy, *c.val_accuracy);
  EXPECT_THROW(eigen_nas(small_space(), train, val, 3, 4, o), input_error);
}

TEST(Ranking, KendallReferenceValues) {
  EXPECT_EQ(kendall_tau({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0);
  EXPECT_EQ(kendall_tau({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
  EXPECT_DOUBLE_EQ(kendall_tau({1, 2, 3, 4}, {1, 3, 2, 4}), 2.0 / 3.0);
  EXPECT_THROW(kendall_tau({1, 2}, {1, 2, 3}), input_error);
}

TEST(Ranking, KendallAgainstPairEnumeration) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(0, 5);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> x(12), y(12);
    for (int i = 0; i < 12; ++i) {
      x[i] = pick(rng);
      y[i] = pick(rng);
    }
    // tau-b from sign products
    double num = 0, tx = 0, ty = 0;
    for (int i = 0; i < 12; ++i)
      for (int j = i + 1; j < 12; ++j) {
        const double sx = (x[i] > x[j]) - (x[i] < x[j]);
        const double sy = (y[i] > y[j]) - (y[i] < y[j]);
        num += sx * sy;
        tx += sx * sx;
        ty += sy * sy;
      }
    EXPECT_NEAR(kendall_tau(x, y), num / std::sqrt(tx * ty), 1e-15);
  }
}

TEST(Ranking, SpearmanAndThreshold) {
  EXPECT_DOUBLE_EQ(spearman_rho({1, 2, 3}, {3, 6, 9}), 1.0);
  EXPECT_NEAR(kendall_null_threshold(30), 0.2527, 1e-3);
  const auto r = average_ranks({5, 1, 5, 3});
  EXPECT_EQ(r, (std::vector<double>{3.5, 1, 3.5, 2}));
}
