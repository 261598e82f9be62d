#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "ntknas/architecture.hpp"
#include "ntknas/data.hpp"
#include "ntknas/errors.hpp"
#include "ntknas/network.hpp"

namespace ntknas {

/// Logistic loss log(1 + exp(-z)).
inline double cross_entropy(double z) {
  if (z < -30.0) return -z + std::log1p(std::exp(z));
  return std::log1p(std::exp(-z));
}

/// d/dz log(1 + exp(-z)) = -1 / (1 + exp(z)).
inline double cross_entropy_deriv(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(z));
}

enum class TrainMode { algorithm1, practical };

struct TrainOptions {
  double gamma = 0.1;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::practical;
  int epochs = 1;
  Convention convention = Convention::paper_init;
  double divergence_limit = 1e6;
};

struct TrainResult {
  Params params;
  std::vector<double> loss_trace;  // loss of each step before its update
  std::size_t returned_iterate = 0;  // 1-based index of the stored iterate (algorithm1)
};

namespace detail {

/// One SGD step on sample (x, y); returns the loss before the update.
inline double sgd_step(Params& p, const Architecture& arch, const Eigen::VectorXd& x, double y,
                       double gamma, double limit, std::size_t iteration, ForwardCache& cache) {
  const double f = forward_batch(p, arch, x, cache)(0);
  const double loss = cross_entropy(y * f);
  if (!std::isfinite(f) || std::abs(f) > limit || !std::isfinite(loss))
    throw divergence_error(iteration, "training diverged (f = " + std::to_string(f) + ")");
  if (gamma == 0.0) return loss;
  const double scale = -gamma * cross_entropy_deriv(y * f) * y;
  const auto delta = backward_batch(p, arch, cache);
  p.w_out.noalias() += scale * cache.a[arch.L - 1].col(0);
  for (int l = 1; l <= arch.L - 1; ++l)
    p.W[l - 1].noalias() += scale * delta[l - 1].col(0) * cache.a[l - 1].col(0).transpose();
  return loss;
}

}  // namespace detail

/// Constant-step SGD on the logistic loss. algorithm1: one pass in data order
/// from a fresh initialization, returning the iterate W^(j) for j drawn
/// uniformly from 1..N before the pass. practical: `epochs` shuffled passes,
/// returning the final iterate.
inline TrainResult sgd_train(const Architecture& arch, const Dataset& data,
                             const TrainOptions& opt) {
  arch.validate();
  if (!(opt.gamma >= 0.0) || !std::isfinite(opt.gamma)) throw input_error("gamma must be >= 0");
  if (data.dim() != arch.d) throw input_error("data dimension does not match d");
  const auto n = static_cast<std::size_t>(data.size());
  if (n == 0) throw input_error("empty training set");
  TrainResult res;
  Params p = init(arch, opt.convention, opt.seed);
  std::mt19937_64 rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
  ForwardCache cache;
  std::size_t iteration = 0;
  if (opt.mode == TrainMode::algorithm1) {
    std::uniform_int_distribution<std::size_t> pick(1, n);
    const std::size_t j = pick(rng);
    res.returned_iterate = j;
    res.loss_trace.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
      if (i == j) res.params = p;
      const auto row = static_cast<Eigen::Index>(i - 1);
      res.loss_trace.push_back(detail::sgd_step(p, arch, data.X.row(row).transpose(), data.y(row),
                                                opt.gamma, opt.divergence_limit, ++iteration,
                                                cache));
    }
    return res;
  }
  if (opt.epochs < 1) throw input_error("epochs must be at least 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  res.loss_trace.reserve(n * static_cast<std::size_t>(opt.epochs));
  for (int e = 0; e < opt.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const auto row = static_cast<Eigen::Index>(idx);
      res.loss_trace.push_back(detail::sgd_step(p, arch, data.X.row(row).transpose(), data.y(row),
                                                opt.gamma, opt.divergence_limit, ++iteration,
                                                cache));
    }
  }
  res.params = std::move(p);
  res.returned_iterate = iteration + 1;
  return res;
}

/// Fraction of samples with sign(f) != y (f = 0 counts as an error).
inline double zero_one_error(const Params& params, const Architecture& arch, const Dataset& data) {
  const Eigen::VectorXd f = predict(params, arch, data.X);
  std::size_t wrong = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i)
    if (!(data.y(i) * f(i) > 0.0)) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(f.size());
}

inline double accuracy(const Params& params, const Architecture& arch, const Dataset& data) {
  return 1.0 - zero_one_error(params, arch, data);
}

}  // namespace ntknas
