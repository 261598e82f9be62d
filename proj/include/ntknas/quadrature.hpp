#pragma once

// Gauss rules and a Gaussian-expectation node generator.
//
// All Gaussian expectations in the library go through for_each_normal_node():
// it emits (x, w) pairs with E[g(X)] ~ sum w g(x) for X ~ N(mean, sd^2).
// Smooth integrands whose features are wide relative to sd use Gauss-Hermite
// directly. Otherwise a composite Gauss-Legendre rule in the standardized
// variable is used, with a panel edge at x = 0 and panels that grow with the
// distance from it.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "ntknas/errors.hpp"

namespace ntknas::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
  // [first, last) holds the nodes whose weight is not negligible (>= 1e-22)
  std::size_t first = 0;
  std::size_t last = 0;
};

namespace detail {

inline Rule build_gauss_hermite(int n) {
  // Golub-Welsch for the probabilists' Hermite weight, then Newton polish of
  // the nodes on the orthonormal recurrence. Weights are 1 / sum_k p_k(z)^2,
  // accumulated with rescaling so large orders do not overflow.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = solver.eigenvalues()(i);
    for (int it = 0; it < 8; ++it) {
      // ratio r_k = p_k / p_{k-1}
      double r = z;
      for (int k = 1; k < n; ++k) {
        r = (z - std::sqrt(static_cast<double>(k)) / r) / std::sqrt(static_cast<double>(k + 1));
      }
      const double step = r / std::sqrt(static_cast<double>(n));
      z -= step;
      if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(z))) break;
    }
    double prev = 0.0;
    double cur = 1.0;
    double sum = 1.0;
    double log_scale = 0.0;
    for (int k = 0; k + 1 < n; ++k) {
      const double next =
          (z * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(static_cast<double>(k + 1));
      prev = cur;
      cur = next;
      sum += cur * cur;
      if (std::abs(cur) > 1e150) {
        prev *= 1e-150;
        cur *= 1e-150;
        sum *= 1e-300;
        log_scale += std::log(1e150);
      }
    }
    rule.nodes[i] = z;
    rule.weights[i] = std::exp(-std::log(sum) - 2.0 * log_scale);
  }
  // symmetrize to remove round-off asymmetry
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double z = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -z;
    rule.nodes[j] = z;
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  rule.first = 0;
  while (rule.first < rule.weights.size() && rule.weights[rule.first] < 1e-22) ++rule.first;
  rule.last = rule.weights.size() - rule.first;
  return rule;
}

inline Rule build_gauss_legendre(int n) {
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  std::sort(rule.nodes.begin(), rule.nodes.end());
  rule.first = 0;
  rule.last = static_cast<std::size_t>(n);
  return rule;
}

template <class Builder>
const Rule& cached_rule(int n, std::map<int, std::unique_ptr<Rule>>& cache, std::mutex& mutex,
                        Builder&& build) {
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, std::make_unique<Rule>(build(n))).first;
  }
  return *it->second;
}

}  // namespace detail

inline constexpr int kMaxOrder = 1024;

/// Probabilists' Gauss-Hermite rule normalized to the standard normal:
/// E[g(Z)] ~ sum_i w_i g(z_i), sum_i w_i = 1.
inline const Rule& gauss_hermite(int n) {
  if (n < 1 || n > kMaxOrder) throw input_error("Gauss-Hermite order out of range");
  static std::map<int, std::unique_ptr<Rule>> cache;
  static std::mutex mutex;
  return detail::cached_rule(n, cache, mutex, detail::build_gauss_hermite);
}

/// Gauss-Legendre rule on [-1, 1].
inline const Rule& gauss_legendre(int n) {
  if (n < 1 || n > kMaxOrder) throw input_error("Gauss-Legendre order out of range");
  static std::map<int, std::unique_ptr<Rule>> cache;
  static std::mutex mutex;
  return detail::cached_rule(n, cache, mutex, detail::build_gauss_legendre);
}

/// Shape of an integrand in x, used to place quadrature nodes.
enum class Shape {
  smooth,          // analytic, singularities off the real axis near Re x = 0
  kinked_at_zero,  // piecewise smooth with a single kink at x = 0
};

struct NodePolicy {
  int order = 128;          // Gauss-Hermite order; composite panels use max(8, order / 12) points
  double gh_max_sd = 1.0;   // plain Gauss-Hermite when sd <= gh_max_sd * feature width
  double z_max = 10.0;      // standardized truncation of the composite rule
  double panel_x = 2.0;     // panel width near x = 0, in units of the feature width
  double grading = 0.5;     // panels grow by this fraction of their distance from x = 0
  double panel_z = 2.0;     // largest panel width in the standardized variable
};

namespace detail {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;

template <class Visit>
void visit_panel(double z0, double z1, double mean, double sd, const Rule& gl, Visit& visit) {
  const double half = 0.5 * (z1 - z0);
  const double mid = z0 + half;
  for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
    const double z = mid + half * gl.nodes[q];
    visit(mean + sd * z, half * gl.weights[q] * kInvSqrt2Pi * std::exp(-0.5 * z * z));
  }
}

// March panels from `from` towards `to` (either direction); widths grow with
// the distance from the feature center zc.
template <class Visit>
void visit_graded(double from, double to, double zc, double fw_z, double sd,
                  const NodePolicy& policy, double mean, const Rule& gl, Visit& visit) {
  const double dir = to > from ? 1.0 : -1.0;
  double z = from;
  while (dir * (to - z) > 1e-14) {
    const double dist = std::abs(z - zc);
    double w = policy.panel_x * std::max(fw_z, policy.grading * dist);
    w = std::min(w, policy.panel_z);
    double next = z + dir * w;
    // avoid a sliver at the end
    if (dir * (to - next) < 0.25 * w) next = to;
    if (dir > 0)
      visit_panel(z, next, mean, sd, gl, visit);
    else
      visit_panel(next, z, mean, sd, gl, visit);
    z = next;
  }
}

}  // namespace detail

/// Emits (x, w) with E[g(X)] ~ sum w g(x), X ~ N(mean, sd^2). `feature_width`
/// is the length scale in x on which g varies near x = 0; infinity means g is
/// smooth apart from a possible kink at 0.
template <class Visit>
void for_each_normal_node(double mean, double sd, Shape shape, const NodePolicy& policy,
                          Visit&& visit, double feature_width = 1.0) {
  if (!(sd >= 0.0) || !std::isfinite(mean)) throw domain_error("invalid normal parameters");
  if (sd == 0.0) {
    visit(mean, 1.0);
    return;
  }
  if (shape == Shape::smooth && sd <= policy.gh_max_sd * feature_width) {
    const Rule& gh = gauss_hermite(policy.order);
    for (std::size_t i = gh.first; i < gh.last; ++i) visit(mean + sd * gh.nodes[i], gh.weights[i]);
    return;
  }
  const Rule& gl = gauss_legendre(std::max(8, policy.order / 12));
  const double zm = policy.z_max;
  const double zc = -mean / sd;
  const double fw_z = feature_width / sd;
  if (zc > -zm && zc < zm) {
    detail::visit_graded(zc, -zm, zc, fw_z, sd, policy, mean, gl, visit);
    detail::visit_graded(zc, zm, zc, fw_z, sd, policy, mean, gl, visit);
  } else if (zc <= -zm) {
    detail::visit_graded(-zm, zm, zc, fw_z, sd, policy, mean, gl, visit);
  } else {
    detail::visit_graded(zm, -zm, zc, fw_z, sd, policy, mean, gl, visit);
  }
}

template <class F>
double normal_expectation(double mean, double sd, Shape shape, const NodePolicy& policy, F&& f,
                          double feature_width = 1.0) {
  double acc = 0.0;
  for_each_normal_node(
      mean, sd, shape, policy, [&](double x, double w) { acc += w * f(x); }, feature_width);
  return acc;
}

}  // namespace ntknas::quad
