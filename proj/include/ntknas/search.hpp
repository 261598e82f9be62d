#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ntknas/activations.hpp"
#include "ntknas/architecture.hpp"
#include "ntknas/data.hpp"
#include "ntknas/errors.hpp"
#include "ntknas/kernel.hpp"
#include "ntknas/network.hpp"
#include "ntknas/parallel.hpp"
#include "ntknas/training.hpp"

namespace ntknas {

enum class SkipPolicy { free, all_on, all_off };

struct SearchSpace {
  int L = 4;
  int m = 256;
  int d = 16;
  std::vector<ActivationTag> allowed = {kAllTags.begin(), kAllTags.end()};
  SkipPolicy skip_policy = SkipPolicy::free;
  double eta = 0.1;

  void validate() const {
    if (allowed.empty()) throw input_error("search space needs at least one activation");
    if (L < 2) throw input_error("search space depth must be at least 2");
    if (m < 1 || d < 1) throw input_error("search space m and d must be positive");
  }
};

inline Architecture sample(const SearchSpace& space, std::mt19937_64& rng) {
  space.validate();
  std::uniform_int_distribution<std::size_t> pick(0, space.allowed.size() - 1);
  std::bernoulli_distribution coin(0.5);
  Architecture arch;
  arch.L = space.L;
  arch.m = space.m;
  arch.d = space.d;
  for (int l = 1; l <= space.L - 1; ++l)
    arch.activations.push_back(make_activation(space.allowed[pick(rng)], space.eta));
  for (int k = 1; k <= space.L - 2; ++k) {
    switch (space.skip_policy) {
      case SkipPolicy::free: arch.skips.push_back(coin(rng) ? 1 : 0); break;
      case SkipPolicy::all_on: arch.skips.push_back(1); break;
      case SkipPolicy::all_off: arch.skips.push_back(0); break;
    }
  }
  arch.validate();
  return arch;
}

enum class ScoreMode {
  trace_diag_empirical,
  trace_diag_analytic,
  min_eig_analytic,
  min_eig_empirical,
  frobenius_empirical,
};

inline std::string to_string(ScoreMode mode) {
  switch (mode) {
    case ScoreMode::trace_diag_empirical: return "trace_diag_empirical";
    case ScoreMode::trace_diag_analytic: return "trace_diag_analytic";
    case ScoreMode::min_eig_analytic: return "min_eig_analytic";
    case ScoreMode::min_eig_empirical: return "min_eig_empirical";
    case ScoreMode::frobenius_empirical: return "frobenius_empirical";
  }
  return "unknown";
}

inline ScoreMode parse_score_mode(const std::string& s) {
  if (s == "trace_diag_empirical" || s == "trace" || s == "eigen_nas")
    return ScoreMode::trace_diag_empirical;
  if (s == "trace_diag_analytic") return ScoreMode::trace_diag_analytic;
  if (s == "min_eig_analytic") return ScoreMode::min_eig_analytic;
  if (s == "min_eig_empirical") return ScoreMode::min_eig_empirical;
  if (s == "frobenius_empirical" || s == "frobenius") return ScoreMode::frobenius_empirical;
  throw input_error("unknown score mode '" + s + "'");
}

struct ScoreOptions {
  std::uint64_t seed = 0;
  int inits = 3;  // empirical modes average over this many paper_init draws
  KernelOptions kernel;
};

inline double eigen_nas_score(const Architecture& arch, const Eigen::MatrixXd& X, ScoreMode mode,
                              const ScoreOptions& opt = {}) {
  arch.validate();
  const int d = static_cast<int>(X.cols());
  switch (mode) {
    case ScoreMode::trace_diag_analytic:
      return ntk_infinite_diagonal(X, arch, opt.kernel).sum() / d;
    case ScoreMode::min_eig_analytic:
      return min_eigenvalue(ntk_infinite(X, arch, opt.kernel).K);
    default: break;
  }
  require_unit_rows(X);
  if (opt.inits < 1) throw input_error("score needs at least one initialization");
  double total = 0.0;
  for (int r = 0; r < opt.inits; ++r) {
    const Params p = init(arch, Convention::paper_init, opt.seed + static_cast<std::uint64_t>(r));
    switch (mode) {
      case ScoreMode::trace_diag_empirical: total += grad_norm_diag(p, arch, X).sum() / d; break;
      case ScoreMode::min_eig_empirical: total += min_eigenvalue(ntk_empirical(p, arch, X)); break;
      case ScoreMode::frobenius_empirical: total += frobenius(ntk_empirical(p, arch, X)); break;
      default: break;
    }
  }
  return total / opt.inits;
}

struct Candidate {
  Architecture arch;
  std::size_t index = 0;  // order of sampling
  double score = 0.0;
  ScoreMode mode = ScoreMode::trace_diag_empirical;
  std::optional<double> val_accuracy;
  bool trained = false;
  bool failed = false;
  std::string failure;
  int rank = 0;  // 1-based position by score
};

struct SearchOptions {
  ScoreMode mode = ScoreMode::trace_diag_empirical;
  int budget = 20;  // training epochs for each of the top-k
  double gamma = 0.005;
  std::uint64_t seed = 0;
  int score_inits = 3;
  int threads = 1;
  KernelOptions kernel;
};

struct SearchResult {
  Candidate best;
  std::vector<Candidate> ranked;  // sorted by score, descending
};

/// Validation accuracy after practical-mode training; failed if training diverges.
inline void train_candidate(Candidate& c, const Dataset& train, const Dataset& val,
                            const SearchOptions& opt) {
  TrainOptions t;
  t.gamma = opt.gamma;
  t.epochs = opt.budget;
  t.mode = TrainMode::practical;
  t.seed = opt.seed * 7919 + c.index;
  c.trained = true;
  try {
    const TrainResult r = sgd_train(c.arch, train, t);
    c.val_accuracy = accuracy(r.params, c.arch, val);
  } catch (const divergence_error& e) {
    c.failed = true;
    c.failure = e.what();
    c.val_accuracy.reset();
  }
}

/// Candidate order: highest val accuracy, then higher score, then earlier sample.
inline bool better_candidate(const Candidate& a, const Candidate& b) {
  if (*a.val_accuracy != *b.val_accuracy) return *a.val_accuracy > *b.val_accuracy;
  if (a.score != b.score) return a.score > b.score;
  return a.index < b.index;
}

inline SearchResult eigen_nas(const SearchSpace& space, const Dataset& train, const Dataset& val,
                              int M, int k, const SearchOptions& opt = {}) {
  space.validate();
  if (M < 1 || k < 1 || k > M) throw input_error("eigen_nas requires M >= k >= 1");
  if (train.dim() != space.d || val.dim() != space.d)
    throw input_error("dataset dimension does not match the search space");
  std::mt19937_64 rng(opt.seed);
  std::vector<Candidate> cands(static_cast<std::size_t>(M));
  for (std::size_t i = 0; i < cands.size(); ++i) {
    cands[i].arch = sample(space, rng);
    cands[i].index = i;
    cands[i].mode = opt.mode;
  }
  ScoreOptions so;
  so.seed = opt.seed;
  so.inits = opt.score_inits;
  so.kernel = opt.kernel;
  parallel_for(0, cands.size(), opt.threads, [&](std::size_t i) {
    ScoreOptions local = so;
    local.seed = so.seed * 1000003 + i * 31;
    cands[i].score = eigen_nas_score(cands[i].arch, train.X, opt.mode, local);
  });
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  for (std::size_t i = 0; i < cands.size(); ++i) cands[i].rank = static_cast<int>(i + 1);
  parallel_for(0, static_cast<std::size_t>(k), opt.threads,
               [&](std::size_t i) { train_candidate(cands[i], train, val, opt); });
  const Candidate* best = nullptr;
  for (int i = 0; i < k; ++i) {
    const Candidate& c = cands[static_cast<std::size_t>(i)];
    if (c.failed) continue;
    if (!best || better_candidate(c, *best)) best = &c;
  }
  if (!best) throw search_error("every top-k candidate diverged during training");
  return {*best, cands};
}

}  // namespace ntknas
