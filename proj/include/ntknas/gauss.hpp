#pragma once

// Gaussian expectations of activations and their derivatives.
//
// Bivariate expectations are computed by conditioning: u ~ N(0, a) and
// v | u ~ N((c/a) u, b (1 - rho^2)). ReLU and LeakyReLU use the arc-cosine
// closed forms unless quadrature is requested explicitly.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "ntknas/activations.hpp"
#include "ntknas/errors.hpp"
#include "ntknas/quadrature.hpp"

namespace ntknas {

struct Cov2 {
  double a = 1.0;  // Var(u)
  double b = 1.0;  // Var(v)
  double c = 0.0;  // Cov(u, v)
};

enum class Moment { square, mean, deriv_square };

enum class Method { automatic, quadrature };

/// Pair of expectations returned by the joint pass.
struct DualPair {
  double value;  // E[sigma(u) sigma(v)]
  double deriv;  // E[sigma'(u) sigma'(v)]
};

inline constexpr double kDegenerateRho = 1.0 - 1e-10;

inline void validate_cov(const Cov2& cov) {
  if (!std::isfinite(cov.a) || !std::isfinite(cov.b) || !std::isfinite(cov.c))
    throw domain_error("covariance entries must be finite");
  if (cov.a < 0.0 || cov.b < 0.0) throw domain_error("variances must be non-negative");
  const double ab = cov.a * cov.b;
  if (cov.c * cov.c > ab * (1.0 + 1e-9) + 1e-14) throw domain_error("covariance is not PSD");
}

namespace closed_form {

/// E[relu(u) relu(v)].
inline double relu_dual(double a, double b, double c) {
  if (a == 0.0 || b == 0.0) return 0.0;
  const double s = std::sqrt(a * b);
  const double rho = std::clamp(c / s, -1.0, 1.0);
  const double theta = std::acos(rho);
  return s / (2.0 * std::numbers::pi) *
         (std::sqrt(std::max(0.0, 1.0 - rho * rho)) + (std::numbers::pi - theta) * rho);
}

/// E[relu'(u) relu'(v)] for a, b > 0.
inline double relu_dual_deriv(double a, double b, double c) {
  const double rho = std::clamp(c / std::sqrt(a * b), -1.0, 1.0);
  return (std::numbers::pi - std::acos(rho)) / (2.0 * std::numbers::pi);
}

inline double expect_1d(const ActivationKind& kind, double var, Moment moment) {
  const double eta = kind.tag == ActivationTag::leaky_relu ? kind.slope : 0.0;
  switch (moment) {
    case Moment::square: return 0.5 * (1.0 + eta * eta) * var;
    case Moment::mean: return (1.0 - eta) * std::sqrt(var / (2.0 * std::numbers::pi));
    case Moment::deriv_square: return var == 0.0 ? 1.0 : 0.5 * (1.0 + eta * eta);
  }
  return 0.0;
}

/// Both dual expectations for ReLU/LeakyReLU with a, b > 0.
inline DualPair dual(const ActivationKind& kind, const Cov2& cov) {
  const double eta = kind.tag == ActivationTag::leaky_relu ? kind.slope : 0.0;
  const double j_pos = relu_dual(cov.a, cov.b, cov.c);
  const double jd = relu_dual_deriv(cov.a, cov.b, cov.c);
  if (eta == 0.0) return {j_pos, jd};
  const double j_neg = relu_dual(cov.a, cov.b, -cov.c);
  const double p = 0.5 * (1.0 + eta);
  const double q = 0.5 * (1.0 - eta);
  const double value = p * p * cov.c + q * q * 2.0 * (j_pos + j_neg);
  const double deriv = eta * eta + eta * (1.0 - eta) + (1.0 - eta) * (1.0 - eta) * jd;
  return {value, deriv};
}

}  // namespace closed_form

namespace detail {

inline double own_feature_width(const ActivationKind& kind) { return feature_width(kind); }

inline DualPair dual_quadrature(const ActivationKind& kind, const Cov2& cov,
                                const quad::NodePolicy& policy) {
  const quad::Shape shape = integrand_shape(kind);
  const double own = own_feature_width(kind);
  const double sa = std::sqrt(cov.a);
  const double sb = std::sqrt(cov.b);
  const double rho = std::clamp(cov.c / (sa * sb), -1.0, 1.0);
  if (std::abs(rho) > kDegenerateRho) {
    const double ratio = (rho > 0.0 ? 1.0 : -1.0) * sb / sa;
    DualPair acc{0.0, 0.0};
    quad::for_each_normal_node(
        0.0, sa, shape, policy,
        [&](double u, double w) {
          const ValueAndSlope fu = eval_both(kind, u);
          const ValueAndSlope fv = eval_both(kind, ratio * u);
          acc.value += w * fu.value * fv.value;
          acc.deriv += w * fu.slope * fv.slope;
        },
        std::min(own, own / std::abs(ratio)));
    return acc;
  }
  const double slope = cov.c / cov.a;
  const double tau = sb * std::sqrt(1.0 - rho * rho);
  // The inner expectation, as a function of u, varies on the scale
  // max(tau, own) / |slope| around u = 0.
  double outer = own;
  if (slope != 0.0) {
    const double inner_scale = (is_homogeneous(kind) ? tau : std::max(tau, own)) / std::abs(slope);
    outer = std::min(own, inner_scale);
  }
  DualPair acc{0.0, 0.0};
  quad::for_each_normal_node(
      0.0, sa, shape, policy,
      [&](double u, double wu) {
        double inner_value = 0.0;
        double inner_deriv = 0.0;
        quad::for_each_normal_node(
            slope * u, tau, shape, policy,
            [&](double v, double wv) {
              const ValueAndSlope fv = eval_both(kind, v);
              inner_value += wv * fv.value;
              inner_deriv += wv * fv.slope;
            },
            own);
        const ValueAndSlope fu = eval_both(kind, u);
        acc.value += wu * fu.value * inner_value;
        acc.deriv += wu * fu.slope * inner_deriv;
      },
      outer);
  return acc;
}

}  // namespace detail

/// E[g(Z)] for Z ~ N(0, variance), g one of sigma^2, sigma, sigma'^2.
inline double expect_1d(const ActivationKind& kind, double variance, Moment moment,
                        int quad_order = 128, Method method = Method::automatic) {
  if (!(variance >= 0.0) || !std::isfinite(variance))
    throw domain_error("variance must be finite and non-negative");
  if (method == Method::automatic && is_homogeneous(kind))
    return closed_form::expect_1d(kind, variance, moment);
  return quad::normal_expectation(
      0.0, std::sqrt(variance), integrand_shape(kind), default_policy(quad_order),
      [&](double x) {
        const ValueAndSlope f = eval_both(kind, x);
        switch (moment) {
          case Moment::square: return f.value * f.value;
          case Moment::mean: return f.value;
          case Moment::deriv_square: return f.slope * f.slope;
        }
        return 0.0;
      },
      detail::own_feature_width(kind));
}

/// E[sigma(u) sigma(v)] and E[sigma'(u) sigma'(v)] in one pass.
inline DualPair dual_both(const ActivationKind& kind, const Cov2& cov, int quad_order = 128,
                          Method method = Method::automatic) {
  validate_cov(cov);
  if (cov.a == 0.0 || cov.b == 0.0) {
    // one side is the point mass at 0
    const ValueAndSlope at0 = eval_both(kind, 0.0);
    const double other = cov.a == 0.0 ? cov.b : cov.a;
    return {at0.value * expect_1d(kind, other, Moment::mean, quad_order, method),
            at0.slope * quad::normal_expectation(
                            0.0, std::sqrt(other), integrand_shape(kind),
                            default_policy(quad_order),
                            [&](double x) { return deriv_unchecked(kind, x); },
                            detail::own_feature_width(kind))};
  }
  if (method == Method::automatic && is_homogeneous(kind)) return closed_form::dual(kind, cov);
  return detail::dual_quadrature(kind, cov, default_policy(quad_order));
}

inline double dual_expect(const ActivationKind& kind, const Cov2& cov, int quad_order = 128,
                          Method method = Method::automatic) {
  return dual_both(kind, cov, quad_order, method).value;
}

inline double dual_deriv_expect(const ActivationKind& kind, const Cov2& cov, int quad_order = 128,
                                Method method = Method::automatic) {
  return dual_both(kind, cov, quad_order, method).deriv;
}

}  // namespace ntknas
