#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

using namespace ntknas;

namespace {

Architecture arch_of(std::vector<ActivationTag> tags, std::vector<int> skips, int m, int d) {
  std::vector<ActivationKind> acts;
  for (auto t : tags) acts.push_back(make_activation(t, 0.2));
  return make_architecture(acts, skips, m, d);
}

double sample_variance(const Eigen::MatrixXd& W) {
  const double mean = W.mean();
  return (W.array() - mean).square().sum() / static_cast<double>(W.size() - 1);
}

double max_rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& ref) {
  return (a - ref).cwiseAbs().maxCoeff() / std::max(ref.cwiseAbs().maxCoeff(), 1e-300);
}

}  // namespace

TEST(Network, InitVarianceByConvention) {
  const Architecture arch = uniform_architecture(ActivationKind::relu(), 3, 0, 1024, 4);
  const Params p = init(arch, Convention::paper_init, 1);
  EXPECT_NEAR(sample_variance(p.W[1]), 1.0 / 1024, 0.05 / 1024);
  const Params q = init(arch, Convention::kernel_matched, 1);
  EXPECT_NEAR(sample_variance(q.W[1]), 1.0, 0.05);
}

TEST(Network, InitDeterministic) {
  const Architecture arch = uniform_architecture(ActivationKind::tanh(), 4, 1, 16, 3);
  EXPECT_TRUE(init(arch, Convention::paper_init, 7) == init(arch, Convention::paper_init, 7));
  EXPECT_FALSE(init(arch, Convention::paper_init, 7) == init(arch, Convention::paper_init, 8));
}

TEST(Network, ForwardHandValues) {
  const Architecture arch = uniform_architecture(ActivationKind::relu(), 2, 0, 1, 1);
  Params p = init(arch, Convention::paper_init, 0);
  p.W[0](0, 0) = 2.0;
  p.w_out(0) = 3.0;
  EXPECT_DOUBLE_EQ(forward(p, arch, Eigen::VectorXd::Ones(1)).f, 6.0);

  const Architecture deep = uniform_architecture(ActivationKind::relu(), 4, 0, 8, 3);
  Params z = init(deep, Convention::paper_init, 2);
  z.W[0].setZero();
  EXPECT_EQ(forward(z, deep, Eigen::Vector3d(0.6, 0.0, 0.8)).f, 0.0);
}

TEST(Network, KernelMatchedFeatureVariance) {
  const Architecture arch = uniform_architecture(ActivationKind::tanh(), 3, 1, 4096, 3);
  const Eigen::MatrixXd X = oracle::sphere_points(1, 3, 4);
  const Params p = init(arch, Convention::kernel_matched, 5);
  const ForwardResult r = forward(p, arch, X.row(0).transpose());
  // per-coordinate second moment of h_2, scaled back to the kernel normalization
  const double emp = r.cache.h[1].squaredNorm() / arch.m;
  const double A2 = ntk_infinite(X, arch).A_at(2)(0, 0);
  // h_2 = W_2 a_1 with ||a_1||^2 ~ A^(2); E[h_2,i^2] = ||a_1||^2
  EXPECT_NEAR(emp, A2, 0.1 * A2);
}

TEST(Network, JacobianMatchesFiniteDifferences) {
  for (auto tag : kAllTags) {
    for (int L : {2, 3, 5}) {
      std::vector<ActivationTag> tags(L - 1, tag);
      for (int alpha : {0, 1}) {
        const Architecture arch = arch_of(tags, std::vector<int>(L - 2, alpha), 6, 3);
        const Params p = init(arch, Convention::paper_init, 10 + L);
        const Eigen::VectorXd x = oracle::sphere_points(1, 3, 3).row(0).transpose();
        const Eigen::VectorXd j = jacobian(p, arch, x);
        const Eigen::VectorXd fd = oracle::fd_jacobian(p, arch, x, 1e-5);
        EXPECT_LE(max_rel_error(j, fd), 1e-5) << to_string(tag) << " L=" << L;
      }
    }
  }
}

TEST(Network, FiniteDifferenceRefinesOnSmoothKinds) {
  const Architecture arch = uniform_architecture(ActivationKind::tanh(), 4, 1, 16, 4);
  const Params p = init(arch, Convention::paper_init, 1);
  const Eigen::VectorXd x = oracle::sphere_points(1, 4, 9).row(0).transpose();
  const Eigen::VectorXd j = jacobian(p, arch, x);
  const double coarse = max_rel_error(oracle::fd_jacobian(p, arch, x, 1e-3), j);
  const double fine = max_rel_error(oracle::fd_jacobian(p, arch, x, 1e-6), j);
  EXPECT_LE(fine, coarse);
}

TEST(Network, LastLayerGradientIsFeatures) {
  const Architecture arch = uniform_architecture(ActivationKind::relu(), 2, 0, 5, 3);
  const Params p = init(arch, Convention::paper_init, 3);
  const Eigen::VectorXd x = oracle::sphere_points(1, 3, 1).row(0).transpose();
  const ForwardResult r = forward(p, arch, x);
  const Eigen::VectorXd j = jacobian(p, arch, x);
  EXPECT_EQ(j.tail(5), r.cache.a[1].col(0));
}

TEST(Network, SkipOnlyPathGradient) {
  // tanh keeps the zero pre-activations away from a kink
  const Architecture arch = uniform_architecture(ActivationKind::tanh(), 4, 1, 4, 3);
  Params p = init(arch, Convention::paper_init, 6);
  for (std::size_t l = 1; l < p.W.size(); ++l) p.W[l].setZero();
  const Eigen::VectorXd x = oracle::sphere_points(1, 3, 2).row(0).transpose();
  const ForwardResult r = forward(p, arch, x);
  // with zero hidden weights a_3 = a_2 = a_1
  EXPECT_EQ(jacobian(p, arch, x).tail(4), r.cache.a[1].col(0));
  const Eigen::VectorXd exact = jacobian(p, arch, x);
  EXPECT_LE(max_rel_error(exact, oracle::fd_jacobian(p, arch, x, 1e-6)), 1e-6);
}

TEST(Network, EmpiricalKernelConsistency) {
  const Architecture arch = arch_of({ActivationTag::tanh, ActivationTag::swish, ActivationTag::relu},
                                    {1, 0}, 32, 5);
  const Params p = init(arch, Convention::paper_init, 4);
  const Eigen::MatrixXd X = oracle::sphere_points(8, 5, 12);
  Eigen::MatrixXd J(8, static_cast<Eigen::Index>(p.count()));
  for (Eigen::Index i = 0; i < 8; ++i) J.row(i) = jacobian(p, arch, X.row(i).transpose()).transpose();
  const Eigen::MatrixXd direct = J * J.transpose();
  const Eigen::MatrixXd K = ntk_empirical(p, arch, X);
  EXPECT_LT((K - direct).cwiseAbs().maxCoeff(), 1e-10 * direct.cwiseAbs().maxCoeff());
  const Eigen::VectorXd diag = grad_norm_diag(p, arch, X);
  EXPECT_LT((diag - K.diagonal()).cwiseAbs().maxCoeff(), 1e-10 * diag.maxCoeff());
  const Eigen::MatrixXd one = X.topRows(1);
  EXPECT_NEAR(ntk_empirical(p, arch, one)(0, 0), J.row(0).squaredNorm(), 1e-10 * J.row(0).squaredNorm());
}

TEST(Network, GradNormDiagAcrossBatches) {
  const Architecture arch = uniform_architecture(ActivationKind::sigmoid(), 3, 1, 8, 4);
  const Params p = init(arch, Convention::paper_init, 1);
  const Eigen::MatrixXd X = oracle::sphere_points(600, 4, 2);
  const Eigen::VectorXd all = grad_norm_diag(p, arch, X);
  for (Eigen::Index i : {0, 255, 256, 599})
    EXPECT_NEAR(all(i), jacobian(p, arch, X.row(i).transpose()).squaredNorm(), 1e-12 * all(i));
}

TEST(Network, GradNormDiagWithZeroHiddenWeights) {
  const Architecture arch = uniform_architecture(ActivationKind::relu(), 3, 0, 2, 2);
  Params p = init(arch, Convention::paper_init, 8);
  p.W[1].setZero();
  Eigen::MatrixXd X(1, 2);
  X << 0.6, 0.8;
  // h_2 = 0 so a_2 = relu(0) = 0: only the W_2 path through relu'(0) = 1 survives
  const Eigen::VectorXd a1 = (p.W[0] * X.row(0).transpose()).cwiseMax(0.0);
  const double expect = p.w_out.squaredNorm() * a1.squaredNorm();
  EXPECT_NEAR(grad_norm_diag(p, arch, X)(0), expect, 1e-14);
}

TEST(Training, CrossEntropy) {
  EXPECT_NEAR(cross_entropy(0.0), std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(cross_entropy_deriv(0.0), -0.5);
  for (double z : {-50.0, -1.0, 0.0, 1.0, 50.0})
    EXPECT_NEAR(cross_entropy(-z), cross_entropy(z) + z, 1e-12) << z;
  EXPECT_TRUE(std::isfinite(cross_entropy(-1000.0)));
}

TEST(Training, ZeroStepKeepsInitialization) {
  const Architecture arch = uniform_architecture(ActivationKind::relu(), 3, 1, 16, 8);
  SynthSpec s;
  s.N = 64;
  s.d = 8;
  s.labels = LabelKind::linear_teacher;
  const Dataset data = generate(s);
  TrainOptions opt;
  opt.gamma = 0.0;
  opt.seed = 3;
  opt.epochs = 2;
  const TrainResult r = sgd_train(arch, data, opt);
  EXPECT_TRUE(r.params == init(arch, Convention::paper_init, 3));
  opt.mode = TrainMode::algorithm1;
  const TrainResult a = sgd_train(arch, data, opt);
  EXPECT_TRUE(a.params == init(arch, Convention::paper_init, 3));
  const Eigen::VectorXd f = predict(a.params, arch, data.X);
  for (std::size_t i = 0; i < a.loss_trace.size(); ++i)
    EXPECT_NEAR(a.loss_trace[i], cross_entropy(data.y(i) * f(i)), 1e-14);
}

TEST(Training, Algorithm1ReturnsOneStoredIterate) {
  const Architecture arch = uniform_architecture(ActivationKind::tanh(), 3, 0, 8, 4);
  SynthSpec s;
  s.N = 40;
  s.d = 4;
  const Dataset data = generate(s);
  TrainOptions opt;
  opt.mode = TrainMode::algorithm1;
  opt.gamma = 0.05;
  opt.seed = 9;
  const TrainResult r = sgd_train(arch, data, opt);
  ASSERT_GE(r.returned_iterate, 1u);
  ASSERT_LE(r.returned_iterate, 40u);
  EXPECT_EQ(r.loss_trace.size(), 40u);
  // replaying the first j-1 steps by hand reproduces the stored iterate
  Params p = init(arch, Convention::paper_init, 9);
  ForwardCache cache;
  for (std::size_t i = 1; i < r.returned_iterate; ++i)
    detail::sgd_step(p, arch, data.X.row(i - 1).transpose(), data.y(i - 1), 0.05, 1e6, i, cache);
  EXPECT_TRUE(p == r.params);
}

TEST(Training, SeparableDataIsLearned) {
  SynthSpec s;
  s.N = 512;
  s.d = 16;
  s.labels = LabelKind::linear_teacher;
  s.margin = 0.2;
  s.seed = 1;
  const Dataset data = generate(s);
  const Architecture arch = uniform_architecture(ActivationKind::relu(), 3, 0, 256, 16);
  TrainOptions opt;
  opt.gamma = 0.1;
  opt.epochs = 5;
  opt.seed = 2;
  const TrainResult r = sgd_train(arch, data, opt);
  EXPECT_LE(zero_one_error(r.params, arch, data), 0.05);
  const std::size_t tenth = r.loss_trace.size() / 10;
  double head = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < tenth; ++i) {
    head += r.loss_trace[i];
    tail += r.loss_trace[r.loss_trace.size() - 1 - i];
  }
  EXPECT_LT(tail, head);
}

TEST(Training, DivergenceReportsIteration) {
  const Architecture arch = uniform_architecture(ActivationKind::relu(), 3, 1, 16, 4);
  SynthSpec s;
  s.N = 32;
  s.d = 4;
  const Dataset data = generate(s);
  TrainOptions opt;
  opt.gamma = 1e4;
  opt.divergence_limit = 1e3;
  try {
    sgd_train(arch, data, opt);
    FAIL() << "expected divergence";
  } catch (const divergence_error& e) {
    EXPECT_GE(e.iteration(), 1u);
    EXPECT_NE(std::string(e.what()).find("iteration"), std::string::npos);
  }
}
