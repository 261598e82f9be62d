#pragma once

// Closed-form eigenvalue and generalization bounds. Order-level constants
// (Theta, O) are set to 1; the data-Gram term uses the explicit constant 9.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ntknas/activations.hpp"
#include "ntknas/architecture.hpp"
#include "ntknas/errors.hpp"

namespace ntknas {

struct BoundOptions {
  int quad_order = 128;
  GmaxRule gmax_rule = GmaxRule::proof;
};

struct Prop4 {
  double value = 0.0;  // max(raw, 0)
  double raw = 0.0;    // N/d - 9 N^(2/3) d^(1/3)
  bool vacuous = false;
};

/// Lower bound on lambda_min(X^T X) for isotropic unit-norm data.
inline Prop4 prop4_bound(double N, double d) {
  if (!(N >= 1.0) || !(d >= 1.0)) throw input_error("prop4_bound requires N >= 1 and d >= 1");
  Prop4 r;
  r.raw = N / d - 9.0 * std::cbrt(N * N) * std::cbrt(d);
  r.value = std::max(r.raw, 0.0);
  r.vacuous = r.raw <= 0.0;
  return r;
}

/// (beta1, beta2, beta3) of sigma_l in the context of `arch`.
inline Betas layer_betas(const Architecture& arch, int l, const BoundOptions& opt) {
  return beta_constants(arch.sigma(l), arch.L, opt.quad_order, arch.leaky_slope(), opt.gmax_rule);
}

inline double thm1_lower(const Architecture& arch, double N, double d,
                         const BoundOptions& opt = {}) {
  arch.validate();
  const double mu1 = hermite_mu(arch.sigma(1), 1, opt.quad_order);
  double prod = 1.0;
  for (int p = 3; p <= arch.L; ++p) prod *= layer_betas(arch, p - 1, opt).beta3 + arch.alpha(p - 2);
  return 2.0 * mu1 * mu1 * prop4_bound(N, d).value * prod;
}

/// The l = 1 summand has leading factor 1 (G^(1) has unit diagonal).
inline double thm1_upper(const Architecture& arch, double N, double d,
                         const BoundOptions& opt = {}) {
  arch.validate();
  const int L = arch.L;
  std::vector<Betas> b(L + 1);
  for (int l = 1; l <= L - 1; ++l) b[l] = layer_betas(arch, l, opt);
  double sum = 0.0;
  for (int l = 1; l <= L; ++l) {
    double term = l == 1 ? 1.0 : b[l - 1].beta1;
    for (int p = 2; p <= l - 1; ++p) term *= b[p - 1].beta1 + arch.alpha(p - 2);
    for (int p = l + 1; p <= L; ++p) term *= b[p - 1].beta2 + arch.alpha(p - 2);
    sum += term;
  }
  return N / d * sum;
}

struct ScorePair {
  double lower = 0.0;
  double upper = 0.0;
};

/// Finite-width eigenvalue scores with all hidden constants set to 1.
inline ScorePair thm2_scores(const Architecture& arch, double N, double d,
                             const BoundOptions& opt = {}) {
  arch.validate();
  const int L = arch.L;
  std::vector<Betas> b(L + 1);
  for (int l = 1; l <= L - 1; ++l) b[l] = layer_betas(arch, l, opt);
  ScorePair s;
  s.lower = N / d;
  for (int i = 2; i <= L - 1; ++i) s.lower *= b[i].beta3 + arch.alpha(i - 1);
  double sum = 0.0;
  for (int k = 0; k <= L - 1; ++k) {
    double prod = 1.0;
    for (int i = k + 2; i <= L - 1; ++i) prod *= b[i].beta2 + arch.alpha(i - 1);
    sum += prod;
  }
  s.upper = N / d * sum;
  return s;
}

/// Single-activation specializations. Sigmoid and Tanh use f_S(1/2) and
/// f_T(2) in the lower bound; the upper bound carries the per-kind leading
/// factor on every summand.
inline ScorePair corollary_bounds(const ActivationKind& kind, int L, const std::vector<int>& skips,
                                  double N, double d, int quad_order = 128) {
  const Architecture arch = make_architecture(std::vector<ActivationKind>(L - 1, kind), skips);
  auto alpha = [&](int k) { return k <= 0 ? 0 : arch.alpha(k); };
  double b3 = 1.0;
  double b_up = 1.0;
  double lead = 1.0;
  switch (kind.tag) {
    case ActivationTag::relu: break;
    case ActivationTag::leaky_relu:
      b3 = b_up = lead = 1.0 + kind.slope * kind.slope;
      break;
    case ActivationTag::sigmoid:
      b3 = f_curve(kind, 0.5, quad_order);
      b_up = lead = 0.125;
      break;
    case ActivationTag::tanh:
      b3 = f_curve(kind, 2.0, quad_order);
      b_up = lead = 2.0;
      break;
    case ActivationTag::swish: b3 = 0.5; break;
  }
  const double mu1 = hermite_mu(kind, 1, quad_order);
  ScorePair r;
  double prod = 1.0;
  for (int p = 3; p <= L; ++p) prod *= b3 + alpha(p - 2);
  r.lower = 2.0 * mu1 * mu1 * prop4_bound(N, d).value * prod;
  double sum = 0.0;
  for (int l = 1; l <= L; ++l) {
    double term = 1.0;
    if (kind.tag == ActivationTag::swish) {
      for (int p = 2; p <= l - 1; ++p) term *= 1.0 + alpha(p - 2);
      for (int p = l + 1; p <= L; ++p) term *= 1.22 + alpha(p - 2);
    } else {
      for (int p = 2; p <= L; ++p) term *= b_up + alpha(p - 2);
      term /= b_up + alpha(l - 2);
    }
    sum += term;
  }
  r.upper = lead * N / d * sum;
  return r;
}

inline double lip_max(const Architecture& arch) {
  double lip = 0.0;
  for (const auto& k : arch.activations) lip = std::max(lip, lipschitz_const(k));
  return lip;
}

/// sqrt(L) (3 Lip + 1)^(L-1)
inline double c2_constant(int L, double lip) {
  return std::sqrt(static_cast<double>(L)) * std::pow(3.0 * lip + 1.0, L - 1);
}

/// sqrt(L) / (3 Lip + 1)^(L-1)
inline double c1_constant(int L, double lip) {
  return std::sqrt(static_cast<double>(L)) / std::pow(3.0 * lip + 1.0, L - 1);
}

struct GenBound {
  double term1 = 0.0;  // C2 sqrt(y^T y / (lambda N))
  double term2 = 0.0;  // sqrt(log(1/delta) / N)
  double c2 = 0.0;
  double value() const { return term1 + term2; }
};

inline GenBound generalization_bound(double lambda_min, const Eigen::VectorXd& y, double delta,
                                     int L, double lip) {
  if (!(lambda_min > 0.0)) throw domain_error("lambda_min must be positive (bound is vacuous)");
  if (!(delta > 0.0 && delta <= std::exp(-1.0))) throw domain_error("delta must lie in (0, 1/e]");
  const double N = static_cast<double>(y.size());
  if (N < 1.0) throw input_error("y must be non-empty");
  GenBound g;
  g.c2 = c2_constant(L, lip);
  g.term1 = g.c2 * std::sqrt(y.squaredNorm() / (lambda_min * N));
  g.term2 = std::sqrt(std::log(1.0 / delta) / N);
  return g;
}

/// kappa C1 sqrt(y^T K^-1 y) / (m sqrt(N)).
inline double step_size_thm3(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, int m,
                             double kappa, int L, double lip) {
  if (K.rows() != y.size() || K.cols() != y.size()) throw input_error("K and y sizes differ");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues()(0) > 0.0))
    throw domain_error("K is singular or indefinite");
  const Eigen::VectorXd proj = eig.eigenvectors().transpose() * y;
  const double quad = (proj.array().square() / eig.eigenvalues().array()).sum();
  const double N = static_cast<double>(y.size());
  return kappa * c1_constant(L, lip) * std::sqrt(quad) / (m * std::sqrt(N));
}

/// Same with y^T K^-1 y relaxed to y^T y / lambda_min.
inline double step_size_thm3_relaxed(double lambda_min, const Eigen::VectorXd& y, int m,
                                     double kappa, int L, double lip) {
  if (!(lambda_min > 0.0)) throw domain_error("lambda_min must be positive");
  const double N = static_cast<double>(y.size());
  return kappa * c1_constant(L, lip) * std::sqrt(y.squaredNorm() / lambda_min) /
         (m * std::sqrt(N));
}

/// Width proxy (3 Lip + 1)^(4L-4) L^2 R^4 / (4 eps^2).
inline double m_star(int L, double lip, double R, double eps) {
  if (!(eps > 0.0)) throw domain_error("eps must be positive");
  return std::pow(3.0 * lip + 1.0, 4 * L - 4) * L * L * std::pow(R, 4) / (4.0 * eps * eps);
}

struct LayerFactors {
  int p = 0;  // factor index: activation sigma_{p-1}, skip alpha_{p-2}
  double with_beta3 = 0.0;
  double with_beta2 = 0.0;
  double with_beta1 = 0.0;
};

struct BoundReport {
  double lower_thm1 = 0.0;
  double upper_thm1 = 0.0;
  double lower_thm2_score = 0.0;
  double upper_thm2_score = 0.0;
  Prop4 prop4;
  double mu1_sq = 0.0;
  double g_max = 0.0;
  double lip_max = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  std::vector<LayerFactors> per_layer_factors;
  std::optional<ScorePair> corollary;
  std::optional<GenBound> gen_bound;
  std::optional<double> lambda_min;
};

inline BoundReport make_bound_report(const Architecture& arch, double N, double d,
                                     const BoundOptions& opt = {}) {
  arch.validate();
  BoundReport r;
  r.prop4 = prop4_bound(N, d);
  const double mu1 = hermite_mu(arch.sigma(1), 1, opt.quad_order);
  r.mu1_sq = mu1 * mu1;
  r.g_max = opt.gmax_rule == GmaxRule::proof ? g_max(arch.L, arch.leaky_slope())
                                             : g_max_alternative(arch.L, arch.leaky_slope());
  r.lower_thm1 = thm1_lower(arch, N, d, opt);
  r.upper_thm1 = thm1_upper(arch, N, d, opt);
  if (arch.L >= 3) {
    const ScorePair s = thm2_scores(arch, N, d, opt);
    r.lower_thm2_score = s.lower;
    r.upper_thm2_score = s.upper;
  }
  r.lip_max = lip_max(arch);
  r.c1 = c1_constant(arch.L, r.lip_max);
  r.c2 = c2_constant(arch.L, r.lip_max);
  for (int p = 2; p <= arch.L; ++p) {
    const Betas b = layer_betas(arch, p - 1, opt);
    const double a = arch.alpha(p - 2);
    r.per_layer_factors.push_back({p, b.beta3 + a, b.beta2 + a, b.beta1 + a});
  }
  if (arch.single_kind())
    r.corollary = corollary_bounds(arch.sigma(1), arch.L, arch.skips, N, d, opt.quad_order);
  return r;
}

}  // namespace ntknas
