#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ntknas/errors.hpp"

namespace ntknas {

/// Unit-norm inputs (rows of X) with labels in {-1, +1}.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;

  Eigen::Index size() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }

  void validate() const {
    if (y.size() != X.rows()) throw input_error("label count does not match sample count");
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      if (std::abs(X.row(i).norm() - 1.0) > 1e-8)
        throw input_error("row " + std::to_string(i) + " is not unit-norm");
      if (y(i) != 1.0 && y(i) != -1.0)
        throw input_error("label of row " + std::to_string(i) + " is not +-1");
    }
  }

  Dataset rows(Eigen::Index begin, Eigen::Index count) const {
    return {X.middleRows(begin, count), y.segment(begin, count)};
  }
};

enum class Distribution { sphere_uniform, gaussian_normalized };

enum class LabelKind { random_sign, linear_teacher };

struct SynthSpec {
  Eigen::Index N = 512;
  Eigen::Index d = 16;
  Distribution distribution = Distribution::sphere_uniform;
  LabelKind labels = LabelKind::random_sign;
  double margin = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline Eigen::VectorXd draw_unit(std::mt19937_64& rng, Eigen::Index d, double sd) {
  std::normal_distribution<double> normal(0.0, sd);
  Eigen::VectorXd v(d);
  for (;;) {
    for (Eigen::Index k = 0; k < d; ++k) v(k) = normal(rng);
    const double n = v.norm();
    if (n > 0.0) return v / n;
  }
}

}  // namespace detail

inline Dataset generate(const SynthSpec& spec) {
  if (spec.N < 1) throw input_error("N must be at least 1");
  if (spec.d < 2) throw input_error("d must be at least 2");
  if (spec.labels == LabelKind::linear_teacher && !(spec.margin >= 0.0 && spec.margin < 1.0))
    throw input_error("margin must lie in [0, 1)");
  std::mt19937_64 rng(spec.seed);
  const double sd =
      spec.distribution == Distribution::sphere_uniform ? 1.0 : 1.0 / std::sqrt(double(spec.d));
  Dataset data{Eigen::MatrixXd(spec.N, spec.d), Eigen::VectorXd(spec.N)};
  if (spec.labels == LabelKind::random_sign) {
    std::bernoulli_distribution coin(0.5);
    for (Eigen::Index i = 0; i < spec.N; ++i) {
      data.X.row(i) = detail::draw_unit(rng, spec.d, sd).transpose();
      data.y(i) = coin(rng) ? 1.0 : -1.0;
    }
    return data;
  }
  const Eigen::VectorXd teacher = detail::draw_unit(rng, spec.d, 1.0);
  const std::int64_t limit = 100 * static_cast<std::int64_t>(spec.N);
  std::int64_t draws = 0;
  for (Eigen::Index i = 0; i < spec.N;) {
    if (++draws > limit)
      throw input_error("margin " + std::to_string(spec.margin) +
                        " too large: rejection sampling exceeded 100 N draws");
    const Eigen::VectorXd x = detail::draw_unit(rng, spec.d, sd);
    const double s = teacher.dot(x);
    if (std::abs(s) < spec.margin) continue;
    data.X.row(i) = x.transpose();
    data.y(i) = s >= 0.0 ? 1.0 : -1.0;
    ++i;
  }
  return data;
}

struct LoadReport {
  double max_renormalization = 0.0;
  bool labels_remapped = false;
  std::vector<std::string> messages;
};

namespace detail {

inline std::vector<double> parse_csv_row(const std::string& line, std::size_t row) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t end = line.find(',', pos);
    if (end == std::string::npos) end = line.size();
    std::size_t a = pos;
    std::size_t b = end;
    while (a < b && std::isspace(static_cast<unsigned char>(line[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(line[b - 1]))) --b;
    double v = 0.0;
    const auto res = std::from_chars(line.data() + a, line.data() + b, v);
    if (a == b || res.ec != std::errc() || res.ptr != line.data() + b)
      throw input_error("cannot parse row " + std::to_string(row) + ", field " +
                        std::to_string(out.size()) + ": '" + line.substr(a, b - a) + "'");
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

}  // namespace detail

/// Reads one sample per line with the label in the last column. Rows are
/// normalized to unit length; labels {0, 1} are mapped to {-1, +1}.
inline Dataset load_csv(const std::string& path, bool header = false, LoadReport* report = nullptr) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t row = lineno++;
    if (header && row == 0) continue;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    rows.push_back(detail::parse_csv_row(line, row));
    if (rows.back().size() < 2)
      throw input_error("row " + std::to_string(row) + " needs at least one feature and a label");
    if (rows.back().size() != rows.front().size())
      throw input_error("row " + std::to_string(row) + " has " +
                        std::to_string(rows.back().size()) + " fields, expected " +
                        std::to_string(rows.front().size()));
  }
  if (rows.empty()) throw input_error("'" + path + "' contains no samples");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.front().size() - 1);
  Dataset data{Eigen::MatrixXd(n, d), Eigen::VectorXd(n)};
  bool zero_one = true;
  bool has_zero = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lab = rows[i].back();
    if (lab != 0.0 && lab != 1.0) zero_one = false;
    if (lab == 0.0) has_zero = true;
  }
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  rep.labels_remapped = zero_one && has_zero;
  if (rep.labels_remapped) rep.messages.push_back("labels {0,1} mapped to {-1,+1}");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) data.X(i, k) = rows[i][k];
    const double norm = data.X.row(i).norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw input_error("row " + std::to_string(i) + " has zero or non-finite norm");
    rep.max_renormalization = std::max(rep.max_renormalization, std::abs(norm - 1.0));
    data.X.row(i) /= norm;
    double lab = rows[i].back();
    if (rep.labels_remapped) lab = lab == 0.0 ? -1.0 : 1.0;
    if (lab != 1.0 && lab != -1.0)
      throw input_error("row " + std::to_string(i) + " label " + std::to_string(lab) +
                        " is not in {-1, +1} or {0, 1}");
    data.y(i) = lab;
  }
  if (rep.max_renormalization > 1e-6) {
    std::ostringstream msg;
    msg << "rows renormalized, max |norm - 1| = " << rep.max_renormalization;
    rep.messages.push_back(msg.str());
  }
  return data;
}

inline void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write '" + path + "'");
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
    for (Eigen::Index k = 0; k < data.X.cols(); ++k) out << data.X(i, k) << ',';
    out << data.y(i) << '\n';
  }
}

}  // namespace ntknas
