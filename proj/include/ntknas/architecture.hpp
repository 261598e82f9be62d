#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ntknas/activations.hpp"
#include "ntknas/errors.hpp"

namespace ntknas {

/// Residual MLP shape. Layer l in 1..L-1 applies activations[l-1]; skips[k-1]
/// is the indicator alpha_k (k = 1..L-2) that adds the features of layer k to
/// those of layer k+1. alpha_0 is 0 by convention.
struct Architecture {
  int L = 2;
  int m = 1;
  int d = 1;
  std::vector<ActivationKind> activations;
  std::vector<int> skips;

  /// alpha_k with alpha_0 = 0.
  int alpha(int k) const {
    if (k <= 0) return 0;
    return skips.at(static_cast<std::size_t>(k - 1));
  }

  const ActivationKind& sigma(int l) const { return activations.at(static_cast<std::size_t>(l - 1)); }

  void validate() const {
    if (L < 2) throw input_error("depth L must be at least 2");
    if (m < 1) throw input_error("width m must be at least 1");
    if (d < 1) throw input_error("input dimension d must be at least 1");
    if (static_cast<int>(activations.size()) != L - 1)
      throw input_error("expected " + std::to_string(L - 1) + " activations for depth " +
                        std::to_string(L) + ", got " + std::to_string(activations.size()));
    if (static_cast<int>(skips.size()) != L - 2)
      throw input_error("expected " + std::to_string(L - 2) + " skip bits for depth " +
                        std::to_string(L) + ", got " + std::to_string(skips.size()));
    for (int a : skips)
      if (a != 0 && a != 1) throw input_error("skip indicators must be 0 or 1");
    for (const auto& k : activations)
      if (k.tag == ActivationTag::leaky_relu && !(k.slope > 0.0 && k.slope < 1.0))
        throw input_error("LeakyReLU slope must lie in (0, 1)");
  }

  /// Largest LeakyReLU slope in the network, 0 if there is none.
  double leaky_slope() const {
    double eta = 0.0;
    for (const auto& k : activations)
      if (k.tag == ActivationTag::leaky_relu) eta = std::max(eta, k.slope);
    return eta;
  }

  bool single_kind() const {
    return std::all_of(activations.begin(), activations.end(),
                       [&](const ActivationKind& k) { return k == activations.front(); });
  }

  bool operator==(const Architecture&) const = default;
};

inline Architecture make_architecture(std::vector<ActivationKind> acts, std::vector<int> skips,
                                      int m = 1, int d = 1) {
  Architecture arch;
  arch.L = static_cast<int>(acts.size()) + 1;
  arch.m = m;
  arch.d = d;
  arch.activations = std::move(acts);
  arch.skips = std::move(skips);
  arch.validate();
  return arch;
}

/// Same activation in every layer and every skip set to `alpha`.
inline Architecture uniform_architecture(const ActivationKind& kind, int L, int alpha, int m = 1,
                                         int d = 1) {
  return make_architecture(std::vector<ActivationKind>(L - 1, kind),
                           std::vector<int>(std::max(0, L - 2), alpha), m, d);
}

/// "relu-tanh-swish"
inline std::string encode_activations(const Architecture& arch) {
  std::string out;
  for (std::size_t i = 0; i < arch.activations.size(); ++i) {
    if (i) out += '-';
    out += to_string(arch.activations[i]);
  }
  return out;
}

/// "0101"
inline std::string encode_skips(const Architecture& arch) {
  std::string out;
  for (int a : arch.skips) out += a ? '1' : '0';
  return out;
}

inline std::vector<ActivationKind> parse_activation_list(const std::string& text, double eta,
                                                         char sep = ',') {
  std::vector<ActivationKind> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (item.empty()) throw input_error("empty activation name in '" + text + "'");
    out.push_back(make_activation(parse_activation_tag(item), eta));
  }
  if (out.empty()) throw input_error("no activations given");
  return out;
}

inline std::vector<int> parse_skip_bits(const std::string& text) {
  std::vector<int> out;
  for (char c : text) {
    if (c == '0' || c == '1')
      out.push_back(c - '0');
    else if (c != ',' && c != ' ')
      throw input_error("skip string must contain only 0 and 1, got '" + text + "'");
  }
  return out;
}

}  // namespace ntknas
