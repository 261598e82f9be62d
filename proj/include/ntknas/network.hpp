#pragma once

// Finite-width residual MLP:
//   h_1 = W_1 x,                 a_1 = s sigma_1(h_1)
//   h_l = W_l a_{l-1},           a_l = s sigma_l(h_l) + alpha_{l-1} a_{l-1}   (2 <= l <= L-1)
//   f   = <W_L, a_{L-1}>
// paper_init: W ~ N(0, 1/m), s = 1.
// kernel_matched: W ~ N(0, 1), s = sqrt(2/m); the Jacobian Gram then
// converges to the infinite-width kernel with the network assembly.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ntknas/activations.hpp"
#include "ntknas/architecture.hpp"
#include "ntknas/data.hpp"
#include "ntknas/errors.hpp"
#include "ntknas/parallel.hpp"

namespace ntknas {

enum class Convention { paper_init, kernel_matched };

inline std::string to_string(Convention c) {
  return c == Convention::paper_init ? "paper_init" : "kernel_matched";
}

inline Convention parse_convention(const std::string& s) {
  if (s == "paper_init") return Convention::paper_init;
  if (s == "kernel_matched") return Convention::kernel_matched;
  throw input_error("unknown convention '" + s + "'");
}

struct Params {
  std::vector<Eigen::MatrixXd> W;  // W_1 (m x d), W_2 .. W_{L-1} (m x m)
  Eigen::VectorXd w_out;           // W_L
  Convention convention = Convention::paper_init;
  std::uint64_t seed = 0;

  std::size_t count() const {
    std::size_t n = static_cast<std::size_t>(w_out.size());
    for (const auto& w : W) n += static_cast<std::size_t>(w.size());
    return n;
  }

  bool operator==(const Params& o) const {
    if (W.size() != o.W.size() || convention != o.convention || seed != o.seed) return false;
    for (std::size_t i = 0; i < W.size(); ++i)
      if (W[i].rows() != o.W[i].rows() || W[i].cols() != o.W[i].cols() || W[i] != o.W[i])
        return false;
    return w_out.size() == o.w_out.size() && w_out == o.w_out;
  }
};

inline double feature_scale(const Architecture& arch, Convention c) {
  return c == Convention::kernel_matched ? std::sqrt(2.0 / arch.m) : 1.0;
}

inline void check_shapes(const Params& p, const Architecture& arch) {
  if (static_cast<int>(p.W.size()) != arch.L - 1)
    throw input_error("parameter block count does not match depth");
  if (p.W[0].rows() != arch.m || p.W[0].cols() != arch.d)
    throw input_error("W_1 must be m x d");
  for (std::size_t l = 1; l < p.W.size(); ++l)
    if (p.W[l].rows() != arch.m || p.W[l].cols() != arch.m)
      throw input_error("hidden weight blocks must be m x m");
  if (p.w_out.size() != arch.m) throw input_error("W_L must have m entries");
}

inline Params init(const Architecture& arch, Convention convention, std::uint64_t seed) {
  arch.validate();
  std::mt19937_64 rng(seed);
  const double sd = convention == Convention::paper_init ? 1.0 / std::sqrt(double(arch.m)) : 1.0;
  std::normal_distribution<double> normal(0.0, sd);
  Params p;
  p.convention = convention;
  p.seed = seed;
  p.W.reserve(arch.L - 1);
  for (int l = 1; l <= arch.L - 1; ++l) {
    const int cols = l == 1 ? arch.d : arch.m;
    Eigen::MatrixXd w(arch.m, cols);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = normal(rng);
    p.W.push_back(std::move(w));
  }
  p.w_out.resize(arch.m);
  for (Eigen::Index i = 0; i < arch.m; ++i) p.w_out(i) = normal(rng);
  return p;
}

/// Per-layer pre-activations h_l and features a_l (a_0 = x), one column per sample.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> h;  // h[l-1] = h_l, l = 1..L-1
  std::vector<Eigen::MatrixXd> a;  // a[l] = a_l, l = 0..L-1
};

struct ForwardResult {
  double f = 0.0;
  ForwardCache cache;
};

namespace detail {

/// Columns of Xt are samples.
inline Eigen::RowVectorXd forward_batch(const Params& p, const Architecture& arch,
                                        const Eigen::MatrixXd& Xt, ForwardCache& cache) {
  const double s = feature_scale(arch, p.convention);
  const int L = arch.L;
  cache.h.resize(L - 1);
  cache.a.resize(L);
  cache.a[0] = Xt;
  for (int l = 1; l <= L - 1; ++l) {
    cache.h[l - 1].noalias() = p.W[l - 1] * cache.a[l - 1];
    const ActivationKind& kind = arch.sigma(l);
    Eigen::MatrixXd& out = cache.a[l];
    out = cache.h[l - 1].unaryExpr([&](double x) { return s * eval_unchecked(kind, x); });
    if (l >= 2 && arch.alpha(l - 1)) out += cache.a[l - 1];
  }
  return p.w_out.transpose() * cache.a[L - 1];
}

/// delta_l = df/dh_l for every sample (columns), l = 1..L-1.
inline std::vector<Eigen::MatrixXd> backward_batch(const Params& p, const Architecture& arch,
                                                   const ForwardCache& cache) {
  const double s = feature_scale(arch, p.convention);
  const int L = arch.L;
  const Eigen::Index B = cache.a[0].cols();
  std::vector<Eigen::MatrixXd> delta(L - 1);
  Eigen::MatrixXd g = p.w_out.replicate(1, B);  // df/da_{L-1}
  for (int l = L - 1; l >= 1; --l) {
    const ActivationKind& kind = arch.sigma(l);
    delta[l - 1] = cache.h[l - 1].unaryExpr([&](double x) { return s * deriv_unchecked(kind, x); })
                       .cwiseProduct(g);
    if (l >= 2) {
      Eigen::MatrixXd next = p.W[l - 1].transpose() * delta[l - 1];
      if (arch.alpha(l - 1)) next += g;
      g = std::move(next);
    }
  }
  return delta;
}

inline void check_input(const Eigen::VectorXd& x, const Architecture& arch) {
  if (x.size() != arch.d) throw input_error("input dimension does not match d");
}

}  // namespace detail

inline ForwardResult forward(const Params& params, const Architecture& arch,
                             const Eigen::VectorXd& x) {
  arch.validate();
  check_shapes(params, arch);
  detail::check_input(x, arch);
  ForwardResult r;
  r.f = detail::forward_batch(params, arch, x, r.cache)(0);
  return r;
}

/// Outputs for every row of X.
inline Eigen::VectorXd predict(const Params& params, const Architecture& arch,
                               const Eigen::MatrixXd& X) {
  check_shapes(params, arch);
  if (X.cols() != arch.d) throw input_error("input dimension does not match d");
  ForwardCache cache;
  return detail::forward_batch(params, arch, X.transpose(), cache).transpose();
}

/// Flat gradient of f: blocks W_1, ..., W_{L-1}, W_L, each row-major.
inline Eigen::VectorXd jacobian(const Params& params, const Architecture& arch,
                                const Eigen::VectorXd& x) {
  arch.validate();
  check_shapes(params, arch);
  detail::check_input(x, arch);
  ForwardCache cache;
  detail::forward_batch(params, arch, x, cache);
  const auto delta = detail::backward_batch(params, arch, cache);
  Eigen::VectorXd out(static_cast<Eigen::Index>(params.count()));
  Eigen::Index pos = 0;
  for (int l = 1; l <= arch.L - 1; ++l) {
    const Eigen::VectorXd& dl = delta[l - 1].col(0);
    const Eigen::VectorXd& prev = cache.a[l - 1].col(0);
    for (Eigen::Index i = 0; i < dl.size(); ++i)
      for (Eigen::Index j = 0; j < prev.size(); ++j) out(pos++) = dl(i) * prev(j);
  }
  out.segment(pos, arch.m) = cache.a[arch.L - 1].col(0);
  return out;
}

inline constexpr Eigen::Index kBatch = 256;

/// Empirical NTK J J^T via the per-layer factorization
/// sum_l (delta_l . delta_l') (a_{l-1} . a_{l-1}') + a_{L-1} . a_{L-1}'.
inline Eigen::MatrixXd ntk_empirical(const Params& params, const Architecture& arch,
                                     const Eigen::MatrixXd& X) {
  arch.validate();
  check_shapes(params, arch);
  if (X.cols() != arch.d) throw input_error("input dimension does not match d");
  ForwardCache cache;
  detail::forward_batch(params, arch, X.transpose(), cache);
  const auto delta = detail::backward_batch(params, arch, cache);
  Eigen::MatrixXd K = cache.a[arch.L - 1].transpose() * cache.a[arch.L - 1];
  for (int l = 1; l <= arch.L - 1; ++l) {
    const Eigen::MatrixXd dd = delta[l - 1].transpose() * delta[l - 1];
    const Eigen::MatrixXd aa = cache.a[l - 1].transpose() * cache.a[l - 1];
    K += dd.cwiseProduct(aa);
  }
  return 0.5 * (K + K.transpose());
}

/// Squared Jacobian norm of every sample, processed in fixed-size batches so
/// the working memory does not grow with N.
inline Eigen::VectorXd grad_norm_diag(const Params& params, const Architecture& arch,
                                      const Eigen::MatrixXd& X) {
  arch.validate();
  check_shapes(params, arch);
  if (X.cols() != arch.d) throw input_error("input dimension does not match d");
  const Eigen::Index n = X.rows();
  Eigen::VectorXd out(n);
  ForwardCache cache;
  for (Eigen::Index b0 = 0; b0 < n; b0 += kBatch) {
    const Eigen::Index B = std::min(kBatch, n - b0);
    detail::forward_batch(params, arch, X.middleRows(b0, B).transpose(), cache);
    const auto delta = detail::backward_batch(params, arch, cache);
    Eigen::ArrayXd acc = cache.a[arch.L - 1].colwise().squaredNorm().transpose().array();
    for (int l = 1; l <= arch.L - 1; ++l)
      acc += delta[l - 1].colwise().squaredNorm().transpose().array() *
             cache.a[l - 1].colwise().squaredNorm().transpose().array();
    out.segment(b0, B) = acc.matrix();
  }
  return out;
}

}  // namespace ntknas
