#pragma once

// Infinite-width NTK of the residual MLP and spectral helpers.
//
// Layer recursion, with alpha_0 = 0 and A^(1) = G^(1) = X X^T:
//   G^(l)    = 2 E[sigma_{l-1}(u) sigma_{l-1}(v)]     (u, v) ~ marginal of A^(l-1)
//   Gdot^(l) = 2 E[sigma'_{l-1}(u) sigma'_{l-1}(v)]
//   A^(l)    = G^(l) + alpha_{l-2} A^(l-1)
// Assembly::network sums, for every layer l, the feature kernel A^(l) times
// the backward product Gdot^(l+1) o prod_{p >= l+2} (Gdot^(p) + alpha_{p-2}),
// which is the exact Jacobian Gram of the network. Assembly::literal uses
// G^(l) in place of A^(l) in the same sum.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ntknas/activations.hpp"
#include "ntknas/architecture.hpp"
#include "ntknas/errors.hpp"
#include "ntknas/gauss.hpp"
#include "ntknas/parallel.hpp"

namespace ntknas {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Assembly { network, literal };

struct KernelOptions {
  int quad_order = 128;
  Assembly assembly = Assembly::network;
  Method method = Method::automatic;
  int threads = 1;
  bool psd_repair = true;
  std::size_t max_n = 2048;
};

/// Per-layer matrices, 1-based accessors follow the layer indices above.
struct KernelStack {
  int L = 0;
  std::vector<Matrix> G;     // G^(1..L)
  std::vector<Matrix> Gdot;  // Gdot^(2..L)
  std::vector<Matrix> A;     // A^(1..L)
  Matrix K;
  double max_repair = 0.0;   // largest |clipped eigenvalue| over all layers

  const Matrix& G_at(int l) const { return G.at(static_cast<std::size_t>(l - 1)); }
  const Matrix& Gdot_at(int l) const { return Gdot.at(static_cast<std::size_t>(l - 2)); }
  const Matrix& A_at(int l) const { return A.at(static_cast<std::size_t>(l - 1)); }
};

inline constexpr double kUnitNormTol = 1e-8;

inline void require_unit_rows(const Matrix& X) {
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double n = X.row(i).norm();
    if (std::abs(n - 1.0) > kUnitNormTol)
      throw input_error("row " + std::to_string(i) + " of X is not unit-norm (norm " +
                        std::to_string(n) + ")");
  }
}

inline double max_asymmetry(const Matrix& M) {
  return (M - M.transpose()).cwiseAbs().maxCoeff();
}

/// Smallest eigenvalue of a symmetric matrix (full eigendecomposition).
inline double min_eigenvalue(const Matrix& M) {
  if (M.rows() != M.cols()) throw input_error("min_eigenvalue needs a square matrix");
  if (M.rows() == 0) throw input_error("min_eigenvalue needs a non-empty matrix");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if (max_asymmetry(M) > 1e-8 * scale) throw input_error("matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(M, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw numerical_error("eigensolver failed");
  return solver.eigenvalues()(0);
}

inline double trace_over_d(const Matrix& M, int d) {
  if (d < 1) throw input_error("d must be positive");
  double s = 0.0;
  for (Eigen::Index i = 0; i < M.rows(); ++i) s += M(i, i);
  return s / d;
}

inline double frobenius(const Matrix& M) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i < M.rows(); ++i) s += M(i, j) * M(i, j);
  return std::sqrt(s);
}

namespace detail {

/// Clips eigenvalues below -1e-10 tr/N to zero. Returns the largest clipped
/// magnitude; throws when the matrix is too far from PSD to be repaired.
inline double repair_psd(Matrix& M) {
  const Eigen::Index n = M.rows();
  const double scale = std::max(M.trace() / static_cast<double>(n), 1e-300);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(M, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw numerical_error("eigensolver failed during PSD repair");
  const double lo = solver.eigenvalues()(0);
  if (lo < -1e-6 * scale)
    throw numerical_error("kernel is not PSD (min eigenvalue " + std::to_string(lo) +
                          ", trace/N " + std::to_string(scale) + ")");
  if (lo >= -1e-10 * scale) return 0.0;
  solver.compute(M);
  Vector ev = solver.eigenvalues();
  for (Eigen::Index i = 0; i < n; ++i)
    if (ev(i) < -1e-10 * scale) ev(i) = 0.0;
  M = solver.eigenvectors() * ev.asDiagonal() * solver.eigenvectors().transpose();
  M = 0.5 * (M + M.transpose()).eval();
  return -lo;
}

/// G and Gdot of the next layer from the marginals of `prev`.
inline void layer_step(const ActivationKind& kind, const Matrix& prev, Matrix& G, Matrix& Gdot,
                       const KernelOptions& opt) {
  const Eigen::Index n = prev.rows();
  G.resize(n, n);
  Gdot.resize(n, n);
  parallel_for(0, static_cast<std::size_t>(n), opt.threads, [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    const double a = std::max(prev(i, i), 0.0);
    for (Eigen::Index j = i; j < n; ++j) {
      const double b = std::max(prev(j, j), 0.0);
      const double bound = std::sqrt(a * b);
      const double c = i == j ? a : std::clamp(prev(i, j), -bound, bound);
      const DualPair e = dual_both(kind, Cov2{a, b, c}, opt.quad_order, opt.method);
      G(i, j) = G(j, i) = 2.0 * e.value;
      Gdot(i, j) = Gdot(j, i) = 2.0 * e.deriv;
    }
  });
}

}  // namespace detail

/// Infinite-width NTK of `arch` on the rows of X.
inline KernelStack ntk_infinite(const Matrix& X, const Architecture& arch,
                                const KernelOptions& opt = {}) {
  arch.validate();
  require_unit_rows(X);
  if (static_cast<std::size_t>(X.rows()) > opt.max_n)
    throw input_error("N exceeds the dense kernel limit of " + std::to_string(opt.max_n));
  const int L = arch.L;
  KernelStack st;
  st.L = L;
  st.G.reserve(L);
  st.Gdot.reserve(L - 1);
  st.A.reserve(L);
  Matrix G1 = X * X.transpose();
  G1 = 0.5 * (G1 + G1.transpose()).eval();
  st.G.push_back(G1);
  st.A.push_back(G1);
  for (int l = 2; l <= L; ++l) {
    Matrix G, Gdot;
    detail::layer_step(arch.sigma(l - 1), st.A.back(), G, Gdot, opt);
    Matrix A = G;
    if (arch.alpha(l - 2)) A += st.A.back();
    if (opt.psd_repair) st.max_repair = std::max(st.max_repair, detail::repair_psd(A));
    st.G.push_back(std::move(G));
    st.Gdot.push_back(std::move(Gdot));
    st.A.push_back(std::move(A));
  }
  const bool literal = opt.assembly == Assembly::literal;
  const Eigen::Index n = X.rows();
  Matrix P = Matrix::Ones(n, n);
  st.K = literal ? st.G_at(L) : st.A_at(L);
  for (int l = L - 1; l >= 1; --l) {
    const Matrix& feat = literal ? st.G_at(l) : st.A_at(l);
    st.K.array() += feat.array() * st.Gdot_at(l + 1).array() * P.array();
    P = ((st.Gdot_at(l + 1).array() + arch.alpha(l - 1)) * P.array()).matrix();
  }
  return st;
}

/// Diagonal of the infinite-width NTK in O(N L): every row is unit-norm, so
/// each diagonal entry follows the same scalar recursion.
inline Vector ntk_infinite_diagonal(const Matrix& X, const Architecture& arch,
                                    const KernelOptions& opt = {}) {
  arch.validate();
  require_unit_rows(X);
  const int L = arch.L;
  std::vector<double> G(L + 1), Gd(L + 1), A(L + 1);
  G[1] = A[1] = 1.0;
  for (int l = 2; l <= L; ++l) {
    const ActivationKind& kind = arch.sigma(l - 1);
    G[l] = 2.0 * expect_1d(kind, A[l - 1], Moment::square, opt.quad_order, opt.method);
    Gd[l] = 2.0 * expect_1d(kind, A[l - 1], Moment::deriv_square, opt.quad_order, opt.method);
    A[l] = G[l] + arch.alpha(l - 2) * A[l - 1];
  }
  const bool literal = opt.assembly == Assembly::literal;
  double k = literal ? G[L] : A[L];
  double p = 1.0;
  for (int l = L - 1; l >= 1; --l) {
    k += (literal ? G[l] : A[l]) * Gd[l + 1] * p;
    p *= Gd[l + 1] + arch.alpha(l - 1);
  }
  return Vector::Constant(X.rows(), k);
}

/// 2 sum_{s=0}^{S} mu_s^2 (X X^T)^{os}, the truncated Hermite expansion of G^(2).
inline Matrix hermite_kernel_layer2(const Matrix& X, const ActivationKind& kind, int S,
                                    int quad_order = 128) {
  if (S < 1) throw input_error("S must be at least 1");
  require_unit_rows(X);
  const std::vector<double> mu = hermite_coefficients(kind, S, quad_order);
  const Matrix gram = X * X.transpose();
  const Eigen::Index n = X.rows();
  Matrix out = Matrix::Zero(n, n);
  Matrix power = Matrix::Ones(n, n);
  for (int s = 0; s <= S; ++s) {
    out += (2.0 * mu[s] * mu[s]) * power;
    power = power.cwiseProduct(gram);
  }
  return out;
}

}  // namespace ntknas
