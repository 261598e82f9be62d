#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ntknas/errors.hpp"

namespace ntknas {

/// Kendall tau-b with tie correction, O(n^2).
inline double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw input_error("kendall_tau: length mismatch");
  if (x.size() < 2) throw input_error("kendall_tau needs at least two observations");
  long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) {
        ++ties_x;
      } else if (dy == 0.0) {
        ++ties_y;
      } else if ((dx > 0.0) == (dy > 0.0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double n1 = static_cast<double>(concordant + discordant + ties_x);
  const double n2 = static_cast<double>(concordant + discordant + ties_y);
  if (n1 == 0.0 || n2 == 0.0) return 0.0;
  return static_cast<double>(concordant - discordant) / std::sqrt(n1 * n2);
}

/// Ranks starting at 1; ties receive their average rank.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw input_error("spearman_rho: length mismatch");
  if (x.size() < 2) throw input_error("spearman_rho needs at least two observations");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

/// Two-sided 5% critical |tau| under independence (normal approximation,
/// Var(tau) = 2 (2n + 5) / (9 n (n - 1))).
inline double kendall_null_threshold(std::size_t n) {
  if (n < 2) throw input_error("kendall_null_threshold needs n >= 2");
  const double nn = static_cast<double>(n);
  return 1.959963984540054 * std::sqrt(2.0 * (2.0 * nn + 5.0) / (9.0 * nn * (nn - 1.0)));
}

}  // namespace ntknas
