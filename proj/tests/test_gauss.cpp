#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"

using namespace ntknas;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(Gauss, Expect1dReference) {
  EXPECT_DOUBLE_EQ(expect_1d(ActivationKind::relu(), 1.0, Moment::square), 0.5);
  EXPECT_DOUBLE_EQ(expect_1d(ActivationKind::leaky_relu(0.5), 1.0, Moment::square), 0.625);
  EXPECT_DOUBLE_EQ(expect_1d(ActivationKind::relu(), 1.0, Moment::deriv_square), 0.5);
}

TEST(Gauss, Expect1dQuadratureMatchesClosedForm) {
  for (auto kind : {ActivationKind::relu(), ActivationKind::leaky_relu(0.3)}) {
    for (double var : {0.3, 1.0, 4.0}) {
      for (auto m : {Moment::square, Moment::mean, Moment::deriv_square}) {
        const double cf = expect_1d(kind, var, m);
        const double q = expect_1d(kind, var, m, 128, Method::quadrature);
        EXPECT_LT(rel(q, cf), 1e-12) << to_string(kind) << " var=" << var;
      }
    }
  }
}

TEST(Gauss, Expect1dSmoothAgainstSimpson) {
  for (auto tag : {ActivationTag::sigmoid, ActivationTag::tanh, ActivationTag::swish}) {
    const ActivationKind k = make_activation(tag);
    for (double var : {0.5, 1.0, 3.0}) {
      const double ref = oracle::simpson_normal([&](double x) { return std::pow(act_eval(k, x), 2); },
                                                std::sqrt(var));
      EXPECT_LT(rel(expect_1d(k, var, Moment::square), ref), 1e-11) << to_string(k);
    }
  }
}

TEST(Gauss, DualReference) {
  const auto relu = ActivationKind::relu();
  EXPECT_NEAR(dual_expect(relu, {1, 1, 1}), 0.5, 1e-15);
  EXPECT_NEAR(dual_expect(relu, {1, 1, 0}), 1.0 / (2.0 * kPi), 1e-15);
  EXPECT_NEAR(dual_expect(ActivationKind::tanh(), {1, 1, 0}), 0.0, 1e-15);
  EXPECT_NEAR(dual_deriv_expect(relu, {1, 1, 1}), 0.5, 1e-15);
  EXPECT_NEAR(dual_deriv_expect(relu, {1, 1, 0}), 0.25, 1e-15);
  EXPECT_NEAR(dual_expect(relu, {1, 1, 0}, 128, Method::quadrature), 1.0 / (2.0 * kPi), 1e-13);
}

TEST(Gauss, TanhDerivOnDiagonalIsHalfFCurve) {
  const auto t = ActivationKind::tanh();
  const double d = dual_deriv_expect(t, {1, 1, 1});
  EXPECT_NEAR(d, 0.5 * f_curve(t, 1.0), 1e-12);
  EXPECT_NEAR(d, expect_1d(t, 1.0, Moment::deriv_square), 1e-12);
}

TEST(Gauss, ReluClosedFormMatchesQuadratureOverGrid) {
  for (auto kind : {ActivationKind::relu(), ActivationKind::leaky_relu(0.2)}) {
    for (double rho : {-0.999, -0.7, -0.2, 0.0, 0.3, 0.8, 0.99, 0.999999}) {
      for (double sa : {0.25, 1.0, 3.0}) {
        for (double sb : {0.5, 1.0, 2.0}) {
          const Cov2 cov{sa * sa, sb * sb, rho * sa * sb};
          const DualPair cf = dual_both(kind, cov);
          const DualPair q = dual_both(kind, cov, 128, Method::quadrature);
          EXPECT_LT(std::abs(q.value - cf.value), 1e-8 * std::abs(cf.value) + 1e-14)
              << to_string(kind) << " rho=" << rho;
          EXPECT_LT(std::abs(q.deriv - cf.deriv), 1e-8 * std::abs(cf.deriv) + 1e-14);
        }
      }
    }
  }
}

TEST(Gauss, QuadratureOrderDoublingStable) {
  for (auto tag : {ActivationTag::sigmoid, ActivationTag::tanh, ActivationTag::swish}) {
    const ActivationKind k = make_activation(tag);
    for (double rho : {-0.9, 0.1, 0.95}) {
      const Cov2 cov{1.7, 0.6, rho * std::sqrt(1.7 * 0.6)};
      const DualPair a = dual_both(k, cov, 128);
      const DualPair b = dual_both(k, cov, 256);
      EXPECT_NEAR(a.value, b.value, 1e-10);
      EXPECT_NEAR(a.deriv, b.deriv, 1e-10);
    }
  }
}

TEST(Gauss, QuadratureWithinMonteCarloError) {
  const Cov2 covs[] = {{1, 1, 0.5}, {2.0, 0.5, -0.6}, {1, 1, 0}};
  for (auto tag : kAllTags) {
    const ActivationKind k = make_activation(tag);
    for (const Cov2& cov : covs) {
      const auto mc = oracle::mc_dual_expect(k, cov, 400000, 11);
      const double q = dual_expect(k, cov, 128, Method::quadrature);
      EXPECT_LE(std::abs(q - mc.value), 3.0 * mc.radius + 1e-15) << to_string(k);
    }
  }
}

TEST(Gauss, DegenerateCorrelationUsesOneDimensionalPath) {
  for (auto tag : kAllTags) {
    const ActivationKind k = make_activation(tag);
    const double diag = dual_expect(k, {1.3, 1.3, 1.3}, 128, Method::quadrature);
    EXPECT_NEAR(diag, expect_1d(k, 1.3, Moment::square, 128, Method::quadrature), 1e-13);
  }
}

TEST(Gauss, ZeroVarianceIsPointMass) {
  const auto s = ActivationKind::swish();
  EXPECT_EQ(dual_expect(s, {0.0, 1.0, 0.0}), 0.0);
  EXPECT_NEAR(dual_deriv_expect(s, {0.0, 1.0, 0.0}), 0.5 * 0.5, 1e-12);
}

TEST(Gauss, RejectsInvalidCovariance) {
  EXPECT_THROW(dual_expect(ActivationKind::tanh(), {1, 1, 1.5}), ntknas::domain_error);
  EXPECT_THROW(dual_expect(ActivationKind::tanh(), {-1, 1, 0}), ntknas::domain_error);
  EXPECT_THROW(expect_1d(ActivationKind::tanh(), -1.0, Moment::square), ntknas::domain_error);
}

TEST(Quadrature, GaussHermiteIntegratesMoments) {
  const auto& r = quad::gauss_hermite(20);
  double m0 = 0, m2 = 0, m4 = 0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    m0 += r.weights[i];
    m2 += r.weights[i] * r.nodes[i] * r.nodes[i];
    m4 += r.weights[i] * std::pow(r.nodes[i], 4);
  }
  EXPECT_NEAR(m0, 1.0, 1e-14);
  EXPECT_NEAR(m2, 1.0, 1e-13);
  EXPECT_NEAR(m4, 3.0, 1e-12);
}

TEST(Quadrature, GaussLegendreExactForPolynomials) {
  const auto& r = quad::gauss_legendre(8);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], 14);
  EXPECT_NEAR(s, 2.0 / 15.0, 1e-14);
}
