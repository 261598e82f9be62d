#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "ntknas/errors.hpp"
#include "ntknas/quadrature.hpp"

namespace ntknas {

enum class ActivationTag { relu, leaky_relu, sigmoid, tanh, swish };

inline constexpr std::array<ActivationTag, 5> kAllTags = {
    ActivationTag::relu, ActivationTag::leaky_relu, ActivationTag::sigmoid, ActivationTag::tanh,
    ActivationTag::swish};

/// An activation function. `slope` is the negative-branch slope of LeakyReLU
/// and is ignored (kept at 0) for every other tag.
struct ActivationKind {
  ActivationTag tag = ActivationTag::relu;
  double slope = 0.0;

  static ActivationKind relu() { return {ActivationTag::relu, 0.0}; }
  static ActivationKind leaky_relu(double eta) {
    if (!(eta > 0.0 && eta < 1.0)) throw input_error("LeakyReLU slope must lie in (0, 1)");
    return {ActivationTag::leaky_relu, eta};
  }
  static ActivationKind sigmoid() { return {ActivationTag::sigmoid, 0.0}; }
  static ActivationKind tanh() { return {ActivationTag::tanh, 0.0}; }
  static ActivationKind swish() { return {ActivationTag::swish, 0.0}; }

  bool operator==(const ActivationKind&) const = default;
};

inline ActivationKind make_activation(ActivationTag tag, double eta = 0.1) {
  return tag == ActivationTag::leaky_relu ? ActivationKind::leaky_relu(eta)
                                          : ActivationKind{tag, 0.0};
}

inline std::string to_string(ActivationTag tag) {
  switch (tag) {
    case ActivationTag::relu: return "relu";
    case ActivationTag::leaky_relu: return "leaky_relu";
    case ActivationTag::sigmoid: return "sigmoid";
    case ActivationTag::tanh: return "tanh";
    case ActivationTag::swish: return "swish";
  }
  return "unknown";
}

inline std::string to_string(const ActivationKind& kind) { return to_string(kind.tag); }

inline ActivationTag parse_activation_tag(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "relu") return ActivationTag::relu;
  if (s == "leaky_relu" || s == "leakyrelu" || s == "leaky" || s == "lrelu")
    return ActivationTag::leaky_relu;
  if (s == "sigmoid") return ActivationTag::sigmoid;
  if (s == "tanh") return ActivationTag::tanh;
  if (s == "swish") return ActivationTag::swish;
  throw input_error("unknown activation '" + std::string(name) + "'");
}

inline bool is_homogeneous(const ActivationKind& kind) {
  return kind.tag == ActivationTag::relu || kind.tag == ActivationTag::leaky_relu;
}

inline bool is_odd(const ActivationKind& kind) {
  return kind.tag == ActivationTag::sigmoid || kind.tag == ActivationTag::tanh;
}

inline quad::Shape integrand_shape(const ActivationKind& kind) {
  return is_homogeneous(kind) ? quad::Shape::kinked_at_zero : quad::Shape::smooth;
}

/// Length scale of sigma near x = 0 for node placement: the distance of the
/// nearest complex singularity, rounded down. Infinite for the piecewise
/// linear kinds.
inline double feature_width(const ActivationKind& kind) {
  switch (kind.tag) {
    case ActivationTag::relu:
    case ActivationTag::leaky_relu: return std::numeric_limits<double>::infinity();
    case ActivationTag::tanh: return 0.5;
    default: return 1.0;
  }
}

namespace detail {

inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

struct ValueAndSlope {
  double value;
  double slope;
};

/// sigma(x) and sigma'(x) without argument checks (hot path).
inline ValueAndSlope eval_both(const ActivationKind& kind, double x) {
  switch (kind.tag) {
    case ActivationTag::relu:
      return x >= 0.0 ? ValueAndSlope{x, 1.0} : ValueAndSlope{0.0, 0.0};
    case ActivationTag::leaky_relu:
      return x >= 0.0 ? ValueAndSlope{x, 1.0} : ValueAndSlope{kind.slope * x, kind.slope};
    case ActivationTag::sigmoid: {
      const double t = std::tanh(0.5 * x);
      return {0.5 * t, 0.25 * (1.0 - t * t)};
    }
    case ActivationTag::tanh: {
      const double t = std::tanh(x);
      return {t, 1.0 - t * t};
    }
    case ActivationTag::swish: {
      const double g = detail::logistic(x);
      return {x * g, g + x * g * (1.0 - g)};
    }
  }
  return {0.0, 0.0};
}

inline double eval_unchecked(const ActivationKind& kind, double x) { return eval_both(kind, x).value; }
inline double deriv_unchecked(const ActivationKind& kind, double x) { return eval_both(kind, x).slope; }

inline double act_eval(const ActivationKind& kind, double x) {
  if (!std::isfinite(x)) throw domain_error("activation argument must be finite");
  return eval_unchecked(kind, x);
}

/// Derivative; the (Leaky)ReLU kink takes the right derivative 1.
inline double act_deriv(const ActivationKind& kind, double x) {
  if (!std::isfinite(x)) throw domain_error("activation argument must be finite");
  return deriv_unchecked(kind, x);
}

/// sup_x |sigma'(x)|.
inline double lipschitz_const(const ActivationKind& kind) {
  switch (kind.tag) {
    case ActivationTag::relu:
    case ActivationTag::leaky_relu:
    case ActivationTag::tanh: return 1.0;
    case ActivationTag::sigmoid: return 0.25;
    case ActivationTag::swish: {
      static const double value = [] {
        // swish' is unimodal on [0, 5] with its maximum near 2.4
        const auto f = [](double x) { return deriv_unchecked(ActivationKind::swish(), x); };
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = 0.0;
        double b = 5.0;
        double c = b - inv_phi * (b - a);
        double d = a + inv_phi * (b - a);
        double fc = f(c);
        double fd = f(d);
        while (b - a > 1e-12) {
          if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
          } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
          }
        }
        return f(0.5 * (a + b));
      }();
      return value;
    }
  }
  return 1.0;
}

/// Upper bound on kernel diagonals at depth L: 2 (2 + eta^2)^(L-2).
inline double g_max(int L, double eta) {
  if (L < 2) throw input_error("g_max requires L >= 2");
  return 2.0 * std::pow(2.0 + eta * eta, L - 2);
}

/// Alternative variance argument t = 3 (1 + eta^2)(2 + eta^2)^(L-3).
inline double g_max_alternative(int L, double eta) {
  if (L < 2) throw input_error("g_max_alternative requires L >= 2");
  return 3.0 * (1.0 + eta * eta) * std::pow(2.0 + eta * eta, L - 3);
}

enum class GmaxRule { proof, footnote };

inline quad::NodePolicy default_policy(int quad_order) {
  quad::NodePolicy p;
  p.order = quad_order;
  return p;
}

/// f(y) = 2 E[sigma'(sqrt(y) Z)^2]; f(0) = 2 sigma'(0)^2.
inline double f_curve(const ActivationKind& kind, double y, int quad_order = 128) {
  if (kind.tag != ActivationTag::sigmoid && kind.tag != ActivationTag::tanh)
    throw input_error("f_curve is defined for Sigmoid and Tanh");
  if (!(y >= 0.0)) throw domain_error("f_curve requires y >= 0");
  return 2.0 * quad::normal_expectation(0.0, std::sqrt(y), quad::Shape::smooth,
                                        default_policy(quad_order),
                                        [&](double x) {
                                          const double s = deriv_unchecked(kind, x);
                                          return s * s;
                                        },
                                        feature_width(kind));
}

/// mu_0..mu_S: E[sigma(Z) h_k(Z)] for orthonormal probabilists' Hermite h_k.
inline std::vector<double> hermite_coefficients(const ActivationKind& kind, int S,
                                                int quad_order = 128) {
  if (S < 0) throw input_error("Hermite truncation must be non-negative");
  quad::NodePolicy policy = default_policy(quad_order);
  policy.z_max = std::max(policy.z_max, 2.0 * std::sqrt(static_cast<double>(S)) + 12.0);
  // Gauss-Hermite of order n is exact up to degree 2n-1; large S needs the
  // composite rule so the polynomial factor does not alias.
  if (2 * S + 16 > quad_order) policy.gh_max_sd = 0.0;
  std::vector<double> mu(S + 1, 0.0);
  std::vector<double> h(S + 1);
  quad::for_each_normal_node(0.0, 1.0, integrand_shape(kind), policy, [&](double z, double w) {
    const double s = eval_unchecked(kind, z) * w;
    h[0] = 1.0;
    if (S >= 1) h[1] = z;
    for (int k = 1; k < S; ++k) {
      h[k + 1] = (z * h[k] - std::sqrt(static_cast<double>(k)) * h[k - 1]) /
                 std::sqrt(static_cast<double>(k + 1));
    }
    for (int k = 0; k <= S; ++k) mu[k] += s * h[k];
  }, std::min(1.0, feature_width(kind)));
  return mu;
}

inline double hermite_mu(const ActivationKind& kind, int k, int quad_order = 128) {
  if (k < 0) throw input_error("Hermite index must be non-negative");
  return hermite_coefficients(kind, k, quad_order)[k];
}

struct Betas {
  double beta1;
  double beta2;
  double beta3;
};

/// Per-kind constants. beta3 for Sigmoid/Tanh is f_S / f_T at the diagonal
/// bound of a depth-L network whose LeakyReLU slope is `eta`.
inline Betas beta_constants(const ActivationKind& kind, int L, int quad_order = 128,
                            double eta = 0.0, GmaxRule rule = GmaxRule::proof) {
  if (L < 2) throw input_error("beta_constants requires L >= 2");
  if (quad_order < 32) throw input_error("quad_order must be >= 32");
  switch (kind.tag) {
    case ActivationTag::relu: return {1.0, 1.0, 1.0};
    case ActivationTag::leaky_relu: {
      const double v = 1.0 + kind.slope * kind.slope;
      return {v, v, v};
    }
    case ActivationTag::sigmoid:
    case ActivationTag::tanh: {
      const double t = rule == GmaxRule::proof ? g_max(L, eta) : g_max_alternative(L, eta);
      const double b = kind.tag == ActivationTag::sigmoid ? 0.125 : 2.0;
      return {b, b, f_curve(kind, t, quad_order)};
    }
    case ActivationTag::swish: return {1.0, 1.22, 0.5};
  }
  return {1.0, 1.0, 1.0};
}

struct ActivationProfile {
  ActivationKind kind;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double beta3 = 0.0;
  double lipschitz = 0.0;
  std::vector<double> hermite;
};

inline ActivationProfile make_profile(const ActivationKind& kind, int L, int hermite_terms = 8,
                                      int quad_order = 128, double eta = 0.0,
                                      GmaxRule rule = GmaxRule::proof) {
  const Betas b = beta_constants(kind, L, quad_order, eta, rule);
  return {kind, b.beta1, b.beta2, b.beta3, lipschitz_const(kind),
          hermite_coefficients(kind, hermite_terms, quad_order)};
}

}  // namespace ntknas
