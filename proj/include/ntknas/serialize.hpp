#pragma once

// File formats.
//
// Kernel binary: "NTKK", u32 version, u64 N, u64 L, N*N f64 row-major.
// Params binary: "NTKP", u32 version, u32 convention, u64 seed, u64 block
// count, then per block u64 rows, u64 cols and rows*cols f64 row-major. The
// last block is W_L stored as an m x 1 column. All values little-endian.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "ntknas/architecture.hpp"
#include "ntknas/bounds.hpp"
#include "ntknas/errors.hpp"
#include "ntknas/network.hpp"
#include "ntknas/search.hpp"

namespace ntknas {

using json = nlohmann::json;

namespace detail {

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in, const std::string& what) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw input_error("truncated file while reading " + what);
  return v;
}

inline void put_matrix(std::ostream& out, const Eigen::MatrixXd& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) put<double>(out, M(i, j));
}

inline Eigen::MatrixXd get_matrix(std::istream& in, std::uint64_t rows, std::uint64_t cols) {
  if (rows > (1u << 20) || cols > (1u << 20)) throw input_error("implausible matrix shape in file");
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = get<double>(in, "matrix data");
  return M;
}

inline void expect_magic(std::istream& in, const char* magic) {
  char buf[4];
  in.read(buf, 4);
  if (!in || std::memcmp(buf, magic, 4) != 0)
    throw input_error(std::string("bad file magic, expected ") + magic);
}

}  // namespace detail

inline constexpr std::uint32_t kFormatVersion = 1;

inline void write_kernel_binary(const std::string& path, const Eigen::MatrixXd& K, int L) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write '" + path + "'");
  out.write("NTKK", 4);
  detail::put<std::uint32_t>(out, kFormatVersion);
  detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(K.rows()));
  detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(L));
  detail::put_matrix(out, K);
}

struct KernelFile {
  Eigen::MatrixXd K;
  int L = 0;
};

inline KernelFile read_kernel_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open '" + path + "'");
  detail::expect_magic(in, "NTKK");
  if (detail::get<std::uint32_t>(in, "version") != kFormatVersion)
    throw input_error("unsupported kernel file version");
  const auto n = detail::get<std::uint64_t>(in, "N");
  KernelFile f;
  f.L = static_cast<int>(detail::get<std::uint64_t>(in, "L"));
  f.K = detail::get_matrix(in, n, n);
  return f;
}

inline std::string matrix_csv(const Eigen::MatrixXd& M) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) out << ',';
      out << M(i, j);
    }
    out << '\n';
  }
  return out.str();
}

inline void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& M) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write '" + path + "'");
  out << matrix_csv(M);
}

inline Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(detail::parse_csv_row(line, rows.size()));
    if (rows.back().size() != rows.front().size()) throw input_error("ragged CSV matrix");
  }
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = rows[i][j];
  return M;
}

inline void write_params_binary(const std::string& path, const Params& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write '" + path + "'");
  out.write("NTKP", 4);
  detail::put<std::uint32_t>(out, kFormatVersion);
  detail::put<std::uint32_t>(out, p.convention == Convention::paper_init ? 0u : 1u);
  detail::put<std::uint64_t>(out, p.seed);
  detail::put<std::uint64_t>(out, p.W.size() + 1);
  for (const auto& w : p.W) {
    detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(w.rows()));
    detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(w.cols()));
    detail::put_matrix(out, w);
  }
  detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(p.w_out.size()));
  detail::put<std::uint64_t>(out, 1);
  detail::put_matrix(out, p.w_out);
}

inline Params read_params_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open '" + path + "'");
  detail::expect_magic(in, "NTKP");
  if (detail::get<std::uint32_t>(in, "version") != kFormatVersion)
    throw input_error("unsupported params file version");
  Params p;
  p.convention = detail::get<std::uint32_t>(in, "convention") == 0 ? Convention::paper_init
                                                                     : Convention::kernel_matched;
  p.seed = detail::get<std::uint64_t>(in, "seed");
  const auto blocks = detail::get<std::uint64_t>(in, "block count");
  if (blocks < 2 || blocks > 4096) throw input_error("implausible block count");
  for (std::uint64_t b = 0; b < blocks; ++b) {
    const auto r = detail::get<std::uint64_t>(in, "rows");
    const auto c = detail::get<std::uint64_t>(in, "cols");
    Eigen::MatrixXd M = detail::get_matrix(in, r, c);
    if (b + 1 < blocks)
      p.W.push_back(std::move(M));
    else
      p.w_out = M.col(0);
  }
  return p;
}

inline json to_json(const Architecture& arch) {
  json acts = json::array();
  for (const auto& k : arch.activations) acts.push_back(to_string(k));
  return {{"L", arch.L},
          {"m", arch.m},
          {"d", arch.d},
          {"activations", acts},
          {"encoded", encode_activations(arch)},
          {"skips", encode_skips(arch)},
          {"eta", arch.leaky_slope()}};
}

inline json to_json(const BoundReport& r) {
  json layers = json::array();
  for (const auto& f : r.per_layer_factors)
    layers.push_back({{"p", f.p},
                      {"beta3_plus_alpha", f.with_beta3},
                      {"beta2_plus_alpha", f.with_beta2},
                      {"beta1_plus_alpha", f.with_beta1}});
  json j = {{"lower_thm1", r.lower_thm1},
            {"upper_thm1", r.upper_thm1},
            {"lower_thm2_score", r.lower_thm2_score},
            {"upper_thm2_score", r.upper_thm2_score},
            {"prop4_term", r.prop4.value},
            {"prop4_raw", r.prop4.raw},
            {"vacuous", r.prop4.vacuous},
            {"mu1_sq", r.mu1_sq},
            {"g_max", r.g_max},
            {"lip_max", r.lip_max},
            {"C1", r.c1},
            {"C2", r.c2},
            {"per_layer_factors", layers},
            {"constants", "certified-shape, uncertified-constant"},
            {"probability", "1 - exp(-d)"}};
  if (r.corollary)
    j["corollary"] = {{"lower", r.corollary->lower}, {"upper", r.corollary->upper}};
  if (r.lambda_min) j["lambda_min"] = *r.lambda_min;
  if (r.gen_bound)
    j["gen_bound"] = {{"value", r.gen_bound->value()},
                      {"term1", r.gen_bound->term1},
                      {"term2", r.gen_bound->term2},
                      {"C2", r.gen_bound->c2}};
  return j;
}

inline json to_json(const Candidate& c) {
  json j = {{"index", c.index},
            {"rank", c.rank},
            {"arch", encode_activations(c.arch)},
            {"skips", encode_skips(c.arch)},
            {"L", c.arch.L},
            {"m", c.arch.m},
            {"score", c.score},
            {"score_mode", to_string(c.mode)},
            {"trained", c.trained},
            {"failed", c.failed}};
  j["val_accuracy"] = c.val_accuracy ? json(*c.val_accuracy) : json(nullptr);
  if (c.failed) j["failure"] = c.failure;
  return j;
}

inline std::string candidates_csv(const std::vector<Candidate>& cands) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "rank,index,arch,skips,score,score_mode,val_accuracy,failed\n";
  for (const auto& c : cands) {
    out << c.rank << ',' << c.index << ',' << encode_activations(c.arch) << ','
        << encode_skips(c.arch) << ',' << c.score << ',' << to_string(c.mode) << ',';
    if (c.val_accuracy) out << *c.val_accuracy;
    out << ',' << (c.failed ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace ntknas
