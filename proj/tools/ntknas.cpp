// ntknas: command-line front end.
//
// Every run writes manifest.json into the output directory. The manifest
// records each resolved flag, so `ntknas replay --manifest <file>` reruns the
// same command. Exit codes: 0 success, 2 input error, 3 numerical error,
// 4 training divergence.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ntknas/ntknas.hpp"

namespace fs = std::filesystem;
using namespace ntknas;
using ojson = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kInput = 2, kNumerical = 3, kDivergence = 4 };

std::string default_output_dir() {
  if (const char* env = std::getenv("NTKNAS_OUTPUT_DIR"); env && *env) return env;
  return "ntknas_out";
}

/// Registers options and remembers how to print their resolved values.
class Flags {
 public:
  explicit Flags(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& name, T& ref, const std::string& help) {
    record_.push_back([name, &ref](ojson& j) { j[name] = ref; });
    return app_->add_option("--" + name, ref, help)->capture_default_str();
  }

  CLI::Option* flag(const std::string& name, bool& ref, const std::string& help) {
    record_.push_back([name, &ref](ojson& j) { j[name] = ref; });
    return app_->add_flag("--" + name, ref, help);
  }

  ojson resolved() const {
    ojson j = ojson::object();
    for (const auto& r : record_) r(j);
    return j;
  }

  CLI::App* app() const { return app_; }

 private:
  CLI::App* app_;
  std::vector<std::function<void(ojson&)>> record_;
};

struct Common {
  std::uint64_t seed = 0;
  int threads = 1;
  int quad_order = 128;
  std::string out = default_output_dir();
};

void add_common(Flags& f, Common& c) {
  f.add("seed", c.seed, "random seed");
  f.add("threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  f.add("quad-order", c.quad_order, "quadrature order")->check(CLI::Range(32, 1024));
  f.add("out", c.out, "output directory (default: $NTKNAS_OUTPUT_DIR or ./ntknas_out)");
}

struct DataFlags {
  std::string data;
  bool header = false;
  int n = 64;
  int d = 16;
  std::string distribution = "sphere";
  std::string labels = "random";
  double margin = 0.0;
};

void add_data(Flags& f, DataFlags& d) {
  f.add("data", d.data, "CSV file (features, label last); generated when empty");
  f.flag("header", d.header, "skip the first CSV line");
  f.add("n", d.n, "generated sample count");
  f.add("d", d.d, "generated input dimension");
  f.add("distribution", d.distribution, "sphere | gaussian");
  f.add("labels", d.labels, "random | teacher");
  f.add("margin", d.margin, "teacher margin");
}

Dataset load_data(const DataFlags& f, std::uint64_t seed, std::vector<std::string>* notes) {
  if (!f.data.empty()) {
    LoadReport rep;
    Dataset d = load_csv(f.data, f.header, &rep);
    if (notes) notes->insert(notes->end(), rep.messages.begin(), rep.messages.end());
    return d;
  }
  SynthSpec s;
  s.N = f.n;
  s.d = f.d;
  s.seed = seed;
  s.margin = f.margin;
  if (f.distribution == "sphere")
    s.distribution = Distribution::sphere_uniform;
  else if (f.distribution == "gaussian")
    s.distribution = Distribution::gaussian_normalized;
  else
    throw input_error("unknown distribution '" + f.distribution + "'");
  if (f.labels == "random")
    s.labels = LabelKind::random_sign;
  else if (f.labels == "teacher")
    s.labels = LabelKind::linear_teacher;
  else
    throw input_error("unknown label kind '" + f.labels + "'");
  return generate(s);
}

struct ArchFlags {
  std::string act = "relu,relu";
  std::string skips;
  int depth = 0;
  double eta = 0.1;
  int m = 256;
};

void add_arch(Flags& f, ArchFlags& a, bool width = false) {
  f.add("act", a.act, "comma-separated activations, one per hidden layer");
  f.add("skips", a.skips, "skip bit-string of length depth-2 (empty: all 0)");
  f.add("depth", a.depth, "depth L (0: number of activations + 1)");
  f.add("eta", a.eta, "LeakyReLU slope");
  if (width) f.add("m", a.m, "hidden width");
}

Architecture make_arch(const ArchFlags& f, int d) {
  Architecture a;
  a.activations = parse_activation_list(f.act, f.eta);
  a.L = f.depth > 0 ? f.depth : static_cast<int>(a.activations.size()) + 1;
  a.skips = f.skips.empty() ? std::vector<int>(std::max(0, a.L - 2), 0) : parse_skip_bits(f.skips);
  a.m = f.m;
  a.d = d;
  a.validate();
  return a;
}

/// Output directory plus the list of files written in it.
class Run {
 public:
  Run(std::string subcommand, const Flags& flags, const Common& common)
      : subcommand_(std::move(subcommand)), config_(flags.resolved()), dir_(common.out) {
    fs::create_directories(dir_);
  }

  std::string path(const std::string& name) {
    files_.push_back(name);
    return (dir_ / name).string();
  }

  void write_text(const std::string& name, const std::string& text) {
    std::ofstream out(path(name));
    if (!out) throw input_error("cannot write '" + (dir_ / name).string() + "'");
    out << text;
  }

  void write_json(const std::string& name, const json& j) { write_text(name, j.dump(2) + "\n"); }

  json& extra() { return extra_; }

  void finish() {
    ojson m;
    m["tool"] = "ntknas";
    m["version"] = kVersion;
    m["subcommand"] = subcommand_;
    m["config"] = config_;
    m["outputs"] = files_;
    if (!extra_.is_null()) m["details"] = ojson::parse(extra_.dump());
    std::ofstream out(dir_ / "manifest.json");
    out << m.dump(2) << "\n";
  }

 private:
  std::string subcommand_;
  ojson config_;
  fs::path dir_;
  std::vector<std::string> files_;
  json extra_;
};

KernelOptions kernel_options(const Common& c) {
  KernelOptions k;
  k.quad_order = c.quad_order;
  k.threads = c.threads;
  return k;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// ---- kernel ----------------------------------------------------------------

struct KernelCmd {
  Common common;
  DataFlags data;
  ArchFlags arch;
  std::string assembly = "network";
  std::string method = "automatic";
  bool binary = false;
};

int run_kernel(const KernelCmd& c, const Flags& flags) {
  Run run("kernel", flags, c.common);
  std::vector<std::string> notes;
  const Dataset data = load_data(c.data, c.common.seed, &notes);
  const Architecture arch = make_arch(c.arch, static_cast<int>(data.dim()));
  KernelOptions opt = kernel_options(c.common);
  if (c.assembly == "literal")
    opt.assembly = Assembly::literal;
  else if (c.assembly != "network")
    throw input_error("unknown assembly '" + c.assembly + "'");
  if (c.method == "quadrature")
    opt.method = Method::quadrature;
  else if (c.method != "automatic")
    throw input_error("unknown method '" + c.method + "'");
  const KernelStack st = ntk_infinite(data.X, arch, opt);
  run.write_text("kernel.csv", matrix_csv(st.K));
  if (c.binary) write_kernel_binary(run.path("kernel.bin"), st.K, arch.L);
  const double lam = min_eigenvalue(st.K);
  json report = {{"N", data.size()},
                 {"d", data.dim()},
                 {"L", arch.L},
                 {"architecture", to_json(arch)},
                 {"assembly", c.assembly},
                 {"lambda_min", lam},
                 {"trace_over_d", trace_over_d(st.K, static_cast<int>(data.dim()))},
                 {"frobenius", frobenius(st.K)},
                 {"max_psd_repair", st.max_repair},
                 {"notes", notes}};
  run.write_json("kernel.json", report);
  run.finish();
  std::cout << "lambda_min " << fmt(lam) << "\n";
  return kOk;
}

// ---- sweep -----------------------------------------------------------------

/// Skip bits of length L-2 for a named configuration.
std::vector<int> skip_config(const std::string& name, int L) {
  const int n = L - 2;
  const int h = n / 2;
  std::vector<int> bits(std::max(0, n), 0);
  for (int i = 1; i <= n; ++i) {
    if (name == "none")
      bits[i - 1] = 0;
    else if (name == "all")
      bits[i - 1] = 1;
    else if (name == "first_half")
      bits[i - 1] = i <= h;
    else if (name == "second_half")
      bits[i - 1] = i > n - h;
    else
      throw input_error("unknown skip configuration '" + name + "'");
  }
  return bits;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct SweepCmd {
  Common common;
  DataFlags data;
  std::string kinds = "relu,leaky_relu,sigmoid,tanh,swish";
  std::string configs = "none,all,first_half,second_half";
  int l_min = 3;
  int l_max = 12;
  double eta = 0.1;
};

int run_sweep(const SweepCmd& c, const Flags& flags) {
  if (c.l_min < 3 || c.l_max > 12 || c.l_min > c.l_max)
    throw input_error("depth range must lie within [3, 12]");
  const auto configs = split(c.configs);
  for (const auto& cfg : configs) skip_config(cfg, 3);
  const auto kinds = parse_activation_list(c.kinds, c.eta);
  Run run("sweep", flags, c.common);
  const Dataset data = load_data(c.data, c.common.seed, nullptr);
  const KernelOptions opt = kernel_options(c.common);
  std::ostringstream csv;
  csv.precision(17);
  csv << "kind,skip_config,L,lambda_min,trace_over_d,frobenius\n";
  for (const auto& kind : kinds) {
    for (const auto& cfg : configs) {
      for (int L = c.l_min; L <= c.l_max; ++L) {
        const Architecture arch =
            make_architecture(std::vector<ActivationKind>(L - 1, kind), skip_config(cfg, L), 1,
                              static_cast<int>(data.dim()));
        const Matrix K = ntk_infinite(data.X, arch, opt).K;
        csv << to_string(kind) << ',' << cfg << ',' << L << ',' << min_eigenvalue(K) << ','
            << trace_over_d(K, static_cast<int>(data.dim())) << ',' << frobenius(K) << '\n';
      }
    }
  }
  run.write_text("sweep.csv", csv.str());
  run.finish();
  return kOk;
}

// ---- bounds ----------------------------------------------------------------

struct BoundsCmd {
  Common common;
  ArchFlags arch;
  double N = 512;
  double d = 16;
  double delta = 0.1;
  double lambda_min = 0.0;
  std::string data;
  bool header = false;
  std::string gmax_rule = "proof";
};

int run_bounds(const BoundsCmd& c, const Flags& flags) {
  Run run("bounds", flags, c.common);
  BoundOptions opt;
  opt.quad_order = c.common.quad_order;
  if (c.gmax_rule == "footnote")
    opt.gmax_rule = GmaxRule::footnote;
  else if (c.gmax_rule != "proof")
    throw input_error("unknown G_max rule '" + c.gmax_rule + "'");
  double N = c.N;
  double d = c.d;
  std::optional<Dataset> data;
  if (!c.data.empty()) {
    data = load_csv(c.data, c.header);
    N = static_cast<double>(data->size());
    d = static_cast<double>(data->dim());
  }
  const Architecture arch = make_arch(c.arch, static_cast<int>(d));
  BoundReport r = make_bound_report(arch, N, d, opt);
  std::optional<Eigen::VectorXd> y;
  if (data) {
    KernelOptions ko = kernel_options(c.common);
    r.lambda_min = min_eigenvalue(ntk_infinite(data->X, arch, ko).K);
    y = data->y;
  } else if (c.lambda_min > 0.0) {
    r.lambda_min = c.lambda_min;
    y = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(N));
  }
  if (r.lambda_min && *r.lambda_min > 0.0)
    r.gen_bound = generalization_bound(*r.lambda_min, *y, c.delta, arch.L, r.lip_max);
  json j = to_json(r);
  j["N"] = N;
  j["d"] = d;
  j["delta"] = c.delta;
  j["architecture"] = to_json(arch);
  run.write_json("bounds.json", j);
  run.finish();
  std::cout << "lower " << fmt(r.lower_thm1) << " upper " << fmt(r.upper_thm1) << "\n";
  return kOk;
}

// ---- search ----------------------------------------------------------------

struct SearchCmd {
  Common common;
  DataFlags data;
  std::string val_data;
  int n_val = 256;
  int M = 30;
  int k = 5;
  std::string mode = "trace_diag_empirical";
  int budget = 5;
  double gamma = 0.005;
  int depth = 4;
  int m = 256;
  std::string kinds = "relu,leaky_relu,sigmoid,tanh,swish";
  std::string skip_policy = "free";
  double eta = 0.1;
  int score_inits = 3;
};

int run_search(const SearchCmd& c, const Flags& flags) {
  Run run("search", flags, c.common);
  std::vector<std::string> notes;
  // Without a validation file the last n-val rows of one pool are held out,
  // so generated train and validation sets share the same teacher.
  Dataset train;
  Dataset val;
  if (!c.val_data.empty()) {
    train = load_data(c.data, c.common.seed, &notes);
    val = load_csv(c.val_data, c.data.header);
  } else {
    DataFlags pool_flags = c.data;
    pool_flags.n = c.data.n + c.n_val;
    const Dataset pool = load_data(pool_flags, c.common.seed, &notes);
    if (c.n_val < 1 || pool.size() <= c.n_val)
      throw input_error("need more than n-val rows to hold out a validation set");
    const Eigen::Index n_train = pool.size() - c.n_val;
    train = pool.rows(0, n_train);
    val = pool.rows(n_train, c.n_val);
  }
  SearchSpace space;
  space.L = c.depth;
  space.m = c.m;
  space.d = static_cast<int>(train.dim());
  space.eta = c.eta;
  space.allowed.clear();
  for (const auto& name : split(c.kinds)) space.allowed.push_back(parse_activation_tag(name));
  if (c.skip_policy == "free")
    space.skip_policy = SkipPolicy::free;
  else if (c.skip_policy == "all_on")
    space.skip_policy = SkipPolicy::all_on;
  else if (c.skip_policy == "all_off")
    space.skip_policy = SkipPolicy::all_off;
  else
    throw input_error("unknown skip policy '" + c.skip_policy + "'");
  SearchOptions opt;
  opt.mode = parse_score_mode(c.mode);
  opt.budget = c.budget;
  opt.gamma = c.gamma;
  opt.seed = c.common.seed;
  opt.score_inits = c.score_inits;
  opt.threads = c.common.threads;
  opt.kernel = kernel_options(c.common);
  const SearchResult res = eigen_nas(space, train, val, c.M, c.k, opt);
  run.write_text("candidates.csv", candidates_csv(res.ranked));
  json ranked = json::array();
  for (const auto& cand : res.ranked) ranked.push_back(to_json(cand));
  run.write_json("search.json", {{"best", to_json(res.best)},
                                 {"ranked", ranked},
                                 {"N_train", train.size()},
                                 {"N_val", val.size()},
                                 {"m", c.m},
                                 {"notes", notes}});
  run.finish();
  std::cout << "best " << encode_activations(res.best.arch) << " skips "
            << encode_skips(res.best.arch) << " val_accuracy " << fmt(*res.best.val_accuracy)
            << "\n";
  return kOk;
}

// ---- convergence -----------------------------------------------------------

struct ConvergenceCmd {
  Common common;
  ArchFlags arch;
  std::string widths = "64,256,1024,4096";
  int seeds = 5;
  int n = 16;
  int d = 8;
};

int run_convergence(const ConvergenceCmd& c, const Flags& flags) {
  Run run("convergence", flags, c.common);
  run.extra()["convention"] = to_string(Convention::kernel_matched);
  SynthSpec s;
  s.N = c.n;
  s.d = c.d;
  s.seed = c.common.seed;
  const Dataset data = generate(s);
  Architecture arch = make_arch(c.arch, c.d);
  const Matrix K = ntk_infinite(data.X, arch, kernel_options(c.common)).K;
  if (c.seeds < 1) throw input_error("seeds must be at least 1");
  std::ostringstream runs, summary;
  runs.precision(17);
  summary.precision(17);
  runs << "m,seed,rel_frobenius_error\n";
  summary << "m,mean_rel_frobenius_error,sd\n";
  for (const auto& w : split(c.widths)) {
    arch.m = std::stoi(w);
    arch.validate();
    std::vector<double> errs;
    for (int r = 0; r < c.seeds; ++r) {
      const std::uint64_t seed = c.common.seed * 1000 + static_cast<std::uint64_t>(r);
      const Params p = init(arch, Convention::kernel_matched, seed);
      const double e = (ntk_empirical(p, arch, data.X) - K).norm() / K.norm();
      errs.push_back(e);
      runs << arch.m << ',' << seed << ',' << e << '\n';
    }
    double mean = 0.0;
    for (double e : errs) mean += e;
    mean /= static_cast<double>(errs.size());
    double var = 0.0;
    for (double e : errs) var += (e - mean) * (e - mean);
    const double sd = errs.size() > 1 ? std::sqrt(var / static_cast<double>(errs.size() - 1)) : 0.0;
    summary << arch.m << ',' << mean << ',' << sd << '\n';
  }
  run.write_text("convergence.csv", summary.str());
  run.write_text("convergence_runs.csv", runs.str());
  run.finish();
  return kOk;
}

// ---- train -----------------------------------------------------------------

struct TrainCmd {
  Common common;
  DataFlags data;
  ArchFlags arch;
  double gamma = 0.1;
  double kappa = -1.0;
  std::string mode = "practical";
  int epochs = 5;
  std::string convention = "paper_init";
  double delta = 0.1;
  double divergence_limit = 1e6;
  int bound_max_n = 1024;
};

int run_train(const TrainCmd& c, const Flags& flags) {
  Run run("train", flags, c.common);
  std::vector<std::string> notes;
  const Dataset data = load_data(c.data, c.common.seed, &notes);
  const Architecture arch = make_arch(c.arch, static_cast<int>(data.dim()));
  TrainOptions opt;
  opt.seed = c.common.seed;
  opt.epochs = c.epochs;
  opt.convention = parse_convention(c.convention);
  opt.divergence_limit = c.divergence_limit;
  if (c.mode == "practical")
    opt.mode = TrainMode::practical;
  else if (c.mode == "algorithm1")
    opt.mode = TrainMode::algorithm1;
  else
    throw input_error("unknown training mode '" + c.mode + "'");
  const double lip = lip_max(arch);
  json report = {{"architecture", to_json(arch)}, {"mode", c.mode}, {"notes", notes}};
  std::optional<Matrix> K;
  if (data.size() <= c.bound_max_n) K = ntk_infinite(data.X, arch, kernel_options(c.common)).K;
  opt.gamma = c.gamma;
  report["gamma_source"] = "flag";
  if (c.kappa >= 0.0) {
    if (!K) throw input_error("--kappa needs N <= --bound-max-n to form the kernel");
    opt.gamma = step_size_thm3(*K, data.y, arch.m, c.kappa, arch.L, lip);
    report["gamma_source"] = "step_size_thm3";
    report["kappa"] = c.kappa;
  }
  report["gamma"] = opt.gamma;
  if (K) {
    const double lam = min_eigenvalue(*K);
    report["lambda_min"] = lam;
    if (lam > 0.0) {
      const GenBound g = generalization_bound(lam, data.y, c.delta, arch.L, lip);
      report["gen_bound"] = {{"value", g.value()}, {"term1", g.term1}, {"term2", g.term2},
                             {"C2", g.c2}, {"delta", c.delta}};
    } else {
      report["gen_bound"] = nullptr;
    }
  }
  const TrainResult res = sgd_train(arch, data, opt);
  write_params_binary(run.path("params.bin"), res.params);
  std::ostringstream loss;
  loss.precision(17);
  loss << "iteration,loss\n";
  for (std::size_t i = 0; i < res.loss_trace.size(); ++i) loss << i + 1 << ',' << res.loss_trace[i] << '\n';
  run.write_text("loss.csv", loss.str());
  report["train_error"] = zero_one_error(res.params, arch, data);
  report["iterations"] = res.loss_trace.size();
  if (opt.mode == TrainMode::algorithm1) report["returned_iterate"] = res.returned_iterate;
  run.write_json("train.json", report);
  run.finish();
  std::cout << "train_error " << fmt(report["train_error"].get<double>()) << "\n";
  return kOk;
}

int run_args(std::vector<std::string> args);

// ---- replay ----------------------------------------------------------------

int run_replay(const std::string& manifest, const std::string& out) {
  std::ifstream in(manifest);
  if (!in) throw input_error("cannot open manifest '" + manifest + "'");
  ojson m;
  try {
    m = ojson::parse(in);
  } catch (const ojson::parse_error& e) {
    throw input_error(std::string("malformed manifest: ") + e.what());
  }
  if (!m.contains("subcommand") || !m.contains("config"))
    throw input_error("manifest lacks subcommand or config");
  std::vector<std::string> args{"ntknas", m["subcommand"].get<std::string>()};
  for (const auto& [key, value] : m["config"].items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + key);
      continue;
    }
    if (value.is_string() && value.get<std::string>().empty()) continue;
    args.push_back("--" + key);
    if (key == "out" && !out.empty())
      args.push_back(out);
    else
      args.push_back(value.is_string() ? value.get<std::string>() : value.dump());
  }
  return run_args(args);
}

int run_args(std::vector<std::string> args) {
  CLI::App app{"Neural tangent kernels, eigenvalue bounds and train-free architecture search"};
  app.require_subcommand(1);

  KernelCmd kernel;
  Flags kf(app.add_subcommand("kernel", "infinite-width NTK of a dataset"));
  add_common(kf, kernel.common);
  add_data(kf, kernel.data);
  add_arch(kf, kernel.arch);
  kf.add("assembly", kernel.assembly, "network | literal");
  kf.add("method", kernel.method, "automatic | quadrature");
  kf.flag("binary", kernel.binary, "also write kernel.bin");

  SweepCmd sweep;
  Flags sf(app.add_subcommand("sweep", "minimum eigenvalue versus depth"));
  add_common(sf, sweep.common);
  sweep.data.n = 32;
  add_data(sf, sweep.data);
  sf.add("kinds", sweep.kinds, "activations to sweep");
  sf.add("configs", sweep.configs, "skip configurations: none, all, first_half, second_half");
  sf.add("l-min", sweep.l_min, "smallest depth");
  sf.add("l-max", sweep.l_max, "largest depth");
  sf.add("eta", sweep.eta, "LeakyReLU slope");

  BoundsCmd bounds;
  Flags bf(app.add_subcommand("bounds", "eigenvalue and generalization bounds"));
  add_common(bf, bounds.common);
  add_arch(bf, bounds.arch);
  bf.add("n", bounds.N, "sample count N");
  bf.add("d", bounds.d, "input dimension d");
  bf.add("delta", bounds.delta, "failure probability in (0, 1/e]");
  bf.add("lambda-min", bounds.lambda_min, "kernel minimum eigenvalue for the generalization bound");
  bf.add("data", bounds.data, "CSV file; sets N, d, labels and lambda_min");
  bf.flag("header", bounds.header, "skip the first CSV line");
  bf.add("gmax-rule", bounds.gmax_rule, "proof | footnote");

  SearchCmd search;
  Flags rf(app.add_subcommand("search", "train-free architecture search"));
  add_common(rf, search.common);
  search.data.n = 512;
  search.data.labels = "teacher";
  search.data.margin = 0.2;
  add_data(rf, search.data);
  rf.add("val-data", search.val_data, "validation CSV; generated when empty");
  rf.add("n-val", search.n_val, "generated validation size");
  rf.add("M", search.M, "candidates sampled");
  rf.add("k", search.k, "candidates trained");
  rf.add("mode", search.mode, "score mode");
  rf.add("budget", search.budget, "training epochs per trained candidate");
  rf.add("gamma", search.gamma, "SGD step size");
  rf.add("depth", search.depth, "network depth L");
  rf.add("m", search.m, "hidden width");
  rf.add("kinds", search.kinds, "allowed activations");
  rf.add("skip-policy", search.skip_policy, "free | all_on | all_off");
  rf.add("eta", search.eta, "LeakyReLU slope");
  rf.add("score-inits", search.score_inits, "initializations averaged by empirical scores");

  ConvergenceCmd conv;
  Flags cf(app.add_subcommand("convergence", "finite-width kernel versus the infinite-width limit"));
  add_common(cf, conv.common);
  conv.arch.act = "tanh,tanh";
  conv.arch.skips = "1";
  add_arch(cf, conv.arch);
  cf.add("widths", conv.widths, "comma-separated widths");
  cf.add("seeds", conv.seeds, "initializations per width");
  cf.add("n", conv.n, "sample count");
  cf.add("d", conv.d, "input dimension");

  TrainCmd train;
  Flags tf(app.add_subcommand("train", "SGD on the logistic loss"));
  add_common(tf, train.common);
  add_data(tf, train.data);
  add_arch(tf, train.arch, true);
  tf.add("gamma", train.gamma, "step size");
  tf.add("kappa", train.kappa, "derive the step size from this kappa (negative: off)");
  tf.add("mode", train.mode, "practical | algorithm1");
  tf.add("epochs", train.epochs, "passes in practical mode");
  tf.add("convention", train.convention, "paper_init | kernel_matched");
  tf.add("delta", train.delta, "failure probability of the generalization bound");
  tf.add("divergence-limit", train.divergence_limit, "abort when |f| exceeds this");
  tf.add("bound-max-n", train.bound_max_n, "largest N for which the kernel is formed");

  std::string manifest, replay_out;
  CLI::App* rp = app.add_subcommand("replay", "rerun the command recorded in a manifest");
  rp->add_option("--manifest", manifest, "manifest.json of an earlier run")->required();
  rp->add_option("--out", replay_out, "output directory override");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (app.got_subcommand("kernel")) return run_kernel(kernel, kf);
    if (app.got_subcommand("sweep")) return run_sweep(sweep, sf);
    if (app.got_subcommand("bounds")) return run_bounds(bounds, bf);
    if (app.got_subcommand("search")) return run_search(search, rf);
    if (app.got_subcommand("convergence")) return run_convergence(conv, cf);
    if (app.got_subcommand("train")) return run_train(train, tf);
    if (app.got_subcommand("replay")) return run_replay(manifest, replay_out);
  } catch (const input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const divergence_error& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kDivergence;
  } catch (const search_error& e) {
    std::cerr << "search failed: " << e.what() << "\n";
    return kDivergence;
  } catch (const ntknas::domain_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const std::out_of_range& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  }
  return kInput;
}

}  // namespace

int main(int argc, char** argv) {
  return run_args(std::vector<std::string>(argv, argv + argc));
}
