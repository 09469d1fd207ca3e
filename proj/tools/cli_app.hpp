#pragma once

#include <CLI11/CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <exception>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dnamf/dnamf.hpp"

namespace dnamf::cli {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kIo = 1, kConfig = 2, kNumerical = 3 };

struct RunConfig {
  std::string command;
  std::string data;
  std::string benchmark;
  std::string kernel = "sqexp";
  std::string model;
  std::string inputs;
  std::string out;
  std::string chain_out;
  double t_target = 0.0;
  double c = 0.7;
  double gamma = 2.0;
  double t_max = 2.5;
  int levels = 0;  // 0: benchmark default
  int n_min = 0;   // 0: benchmark default
  int dim = 0;
  int reps = 20;
  int n_test = 100;
  std::uint64_t seed = 0;
  bool non_nested = false;
  int sem_iters = 100;
  int sem_draws = 50;
  int multistarts = 5;
  int threads = 0;  // 0: hardware concurrency
};

// ------------------------------------------------------------------ helpers

inline void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out.empty() || cfg.out == "-")
    out << text;
  else
    write_text_file(cfg.out, text);
}

inline Schedule schedule_from(const RunConfig& cfg, std::optional<BenchmarkFn> fn) {
  int levels = cfg.levels, n_min = cfg.n_min;
  if (fn) {
    const auto def = benchmark_defaults(*fn);
    if (levels == 0) levels = def.levels;
    if (n_min == 0) n_min = def.n_min;
  }
  if (levels == 0) levels = 5;
  if (n_min == 0) n_min = 1;
  return make_schedule(cfg.t_max, cfg.c, cfg.gamma, n_min, levels);
}

inline MultiFidelityData load_data(const std::string& path) {
  const fs::path p(path);
  if (!fs::exists(p)) throw IoError("data file '" + path + "' does not exist");
  if (p.extension() == ".csv") return load_csv_dataset(p);
  return load_manifest(p);
}

inline OptimizerConfig optimizer_from(const RunConfig& cfg) {
  OptimizerConfig o;
  o.multistarts = cfg.multistarts;
  if (o.multistarts < 1) throw ConfigError("--multistarts must be at least 1");
  return o;
}

inline std::string hyper_summary(const DnaModel& m) {
  std::ostringstream s;
  s << "kernel " << to_string(m.kind) << "\n";
  s << "level1: alpha " << format_double(m.level1.alpha) << " tau2 "
    << format_double(m.level1.tau2) << " theta";
  for (Eigen::Index j = 0; j < m.level1.hyper.theta.size(); ++j)
    s << ' ' << format_double(m.level1.hyper.theta(j));
  s << "\naugmented: alpha " << format_double(m.alpha) << " tau2 " << format_double(m.tau2)
    << " theta_x";
  for (Eigen::Index j = 0; j < m.hyper.theta_x.size(); ++j)
    s << ' ' << format_double(m.hyper.theta_x(j));
  s << " theta_y " << format_double(m.hyper.theta_y) << " theta_t "
    << format_double(m.hyper.theta_t) << " beta " << format_double(m.hyper.beta) << " delta "
    << format_double(m.hyper.delta) << "\n";
  return s.str();
}

inline std::string chain_csv(const SemState& s, Eigen::Index d) {
  std::ostringstream o;
  o << "iteration";
  for (Eigen::Index j = 0; j < d; ++j) o << ",theta1_" << j + 1;
  o << ",alpha1,tau2_1";
  for (Eigen::Index j = 0; j < d; ++j) o << ",theta_x" << j + 1;
  o << ",theta_y,theta_t,beta,delta,alpha,tau2,profile_loglik\n";
  for (std::size_t m = 0; m < s.chain.size(); ++m) {
    const auto& p = s.chain[m];
    o << m;
    for (Eigen::Index j = 0; j < d; ++j) o << ',' << format_double(p.level1_hyper.theta(j));
    o << ',' << format_double(p.alpha1) << ',' << format_double(p.tau2_1);
    for (Eigen::Index j = 0; j < d; ++j) o << ',' << format_double(p.hyper.theta_x(j));
    o << ',' << format_double(p.hyper.theta_y) << ',' << format_double(p.hyper.theta_t) << ','
      << format_double(p.hyper.beta) << ',' << format_double(p.hyper.delta) << ','
      << format_double(p.alpha) << ',' << format_double(p.tau2) << ','
      << format_double(-s.objective[m]) << '\n';
  }
  return o.str();
}

inline std::string predictions_csv(const MatrixXd& X, const std::vector<Prediction>& preds) {
  std::ostringstream o;
  for (Eigen::Index j = 0; j < X.cols(); ++j) o << 'x' << j + 1 << ',';
  o << "t,mean,variance\n";
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) o << format_double(X(i, j)) << ',';
    const auto& p = preds[static_cast<std::size_t>(i)];
    o << format_double(p.t_target) << ',' << format_double(p.mean) << ','
      << format_double(p.var) << '\n';
  }
  return o.str();
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ----------------------------------------------------------------- commands

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.benchmark.empty()) throw ConfigError("simulate needs --benchmark");
  const BenchmarkFn fn = parse_benchmark(cfg.benchmark);
  const Schedule s = schedule_from(cfg, fn);
  const auto data = generate_benchmark_data(fn, s, cfg.seed, !cfg.non_nested);
  emit(cfg, to_json(data).dump(2) + "\n", out);
  return kOk;
}

inline int cmd_design(const RunConfig& cfg, std::ostream& out) {
  std::optional<BenchmarkFn> fn;
  if (!cfg.benchmark.empty()) fn = parse_benchmark(cfg.benchmark);
  const int d = fn ? benchmark_dim(*fn) : cfg.dim;
  if (d < 1) throw ConfigError("design needs --benchmark or --dim");
  const Domain dom = fn ? benchmark_domain(*fn) : Domain{VectorXd::Zero(d), VectorXd::Ones(d)};
  const Schedule s = schedule_from(cfg, fn);
  const auto designs = cfg.non_nested ? independent_design(s.n, d, dom, cfg.seed)
                                      : nested_design(s.n, d, dom, cfg.seed);
  nlohmann::json j;
  j["t"] = s.t;
  j["n"] = s.n;
  j["c"] = s.c;
  j["gamma"] = s.gamma;
  auto arr = nlohmann::json::array();
  for (const auto& X : designs) arr.push_back(matrix_to_json(X));
  j["designs"] = std::move(arr);
  emit(cfg, j.dump(2) + "\n", out);
  return kOk;
}

inline MultiFidelityData data_for_fit(const RunConfig& cfg) {
  if (!cfg.data.empty() && !cfg.benchmark.empty())
    throw ConfigError("give either --data or --benchmark, not both");
  if (!cfg.data.empty()) return load_data(cfg.data);
  if (!cfg.benchmark.empty()) {
    const BenchmarkFn fn = parse_benchmark(cfg.benchmark);
    return generate_benchmark_data(fn, schedule_from(cfg, fn), cfg.seed, !cfg.non_nested);
  }
  throw ConfigError("fit needs --data or --benchmark");
}

inline int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto data = data_for_fit(cfg);
  const KernelKind kind = parse_kernel_kind(cfg.kernel);
  const auto opt = optimizer_from(cfg);
  if (!cfg.non_nested && !check_nested(data))
    throw ConfigError("data are not nested; rerun with --non-nested");
  nlohmann::json j;
  std::string summary;
  if (cfg.non_nested) {
    const SemFit sf = sem_fit(data, kind, cfg.sem_iters, cfg.seed, opt);
    j = model_to_json(sf.model, &sf.state);
    summary = hyper_summary(sf.model);
    if (!sf.state.trivial()) {
      std::string chain_path = cfg.chain_out;
      if (chain_path.empty() && !cfg.out.empty() && cfg.out != "-") chain_path = cfg.out + ".chain.csv";
      if (!chain_path.empty()) write_text_file(chain_path, chain_csv(sf.state, data.dim()));
    }
  } else {
    const DnaModel m = fit(data, kind, opt, cfg.seed);
    j = model_to_json(m);
    summary = hyper_summary(m);
  }
  if (cfg.out.empty() || cfg.out == "-") {
    out << j.dump(2) << "\n";
    err << summary;
  } else {
    write_text_file(cfg.out, j.dump(2) + "\n");
    out << summary;
  }
  return kOk;
}

inline MatrixXd test_inputs(const RunConfig& cfg, const DnaModel& m) {
  if (!cfg.inputs.empty()) {
    if (!fs::exists(cfg.inputs)) throw IoError("inputs file '" + cfg.inputs + "' does not exist");
    const MatrixXd X = read_numeric_csv(cfg.inputs);
    if (X.cols() != m.dim()) throw ConfigError("inputs have the wrong number of columns");
    return X;
  }
  if (cfg.n_test < 1) throw ConfigError("--n-test must be positive");
  // Uniform draws over the bounding box of the level-1 design.
  const MatrixXd& X1 = m.data.level(0).X;
  const VectorXd lo = X1.colwise().minCoeff(), hi = X1.colwise().maxCoeff();
  Rng rng(derive_seed(cfg.seed, 0x7e57));
  MatrixXd X(cfg.n_test, m.dim());
  for (int i = 0; i < cfg.n_test; ++i)
    for (Eigen::Index j = 0; j < m.dim(); ++j) X(i, j) = lo(j) + uniform01(rng) * (hi(j) - lo(j));
  return X;
}

inline int cmd_predict(const RunConfig& cfg, std::ostream& out) {
  if (cfg.model.empty()) throw ConfigError("predict needs --model");
  if (!fs::exists(cfg.model)) throw IoError("model file '" + cfg.model + "' does not exist");
  const LoadedModel lm = model_from_json(read_json_file(cfg.model));
  const MatrixXd X = test_inputs(cfg, lm.model);
  const auto preds = lm.sem ? sem_predict(lm.model, *lm.sem, X, cfg.t_target, cfg.sem_draws, cfg.seed)
                            : predict_batch(lm.model, X, cfg.t_target);
  emit(cfg, predictions_csv(X, preds), out);
  return kOk;
}

struct BenchmarkRep {
  std::uint64_t seed = 0;
  ScoreReport dna, baseline;
  double beta = 0.0;  // fitted interaction parameter
};

struct BenchmarkSetup {
  BenchmarkFn fn = BenchmarkFn::Additive;
  KernelKind kind = KernelKind::SqExp;
  Schedule schedule;
  OptimizerConfig opt;
  int n_test = 100;
  double t_target = 0.0;
  bool non_nested = false;
  int sem_iters = 100;
  int sem_draws = 50;
};

// One repetition: simulate, fit, score at random test inputs, and score a GP fitted to
// the finest level alone.
inline BenchmarkRep benchmark_rep(const BenchmarkSetup& b, std::uint64_t seed) {
  BenchmarkRep rep;
  rep.seed = seed;
  const auto data = generate_benchmark_data(b.fn, b.schedule, seed, !b.non_nested);
  const MatrixXd X = random_inputs(b.fn, b.n_test, seed);
  VectorXd truth(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    truth(i) = eval_benchmark(b.fn, b.t_target, X.row(i).transpose());

  std::vector<Prediction> preds;
  if (b.non_nested) {
    const SemFit sf = sem_fit(data, b.kind, b.sem_iters, seed, b.opt);
    rep.beta = sf.model.hyper.beta;
    preds = sem_predict(sf.model, sf.state, X, b.t_target, b.sem_draws, seed);
  } else {
    const DnaModel m = fit(data, b.kind, b.opt, seed);
    rep.beta = m.hyper.beta;
    preds = predict_batch(m, X, b.t_target);
  }
  VectorXd mu(X.rows()), var(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    mu(i) = preds[static_cast<std::size_t>(i)].mean;
    var(i) = preds[static_cast<std::size_t>(i)].var;
  }
  rep.dna = score(mu, var, truth);

  const auto& fine = data.level(data.num_levels() - 1);
  const Level1Model base = fit_level1(fine.X, fine.y, b.opt, derive_seed(seed, 0xba5e));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Moments pb = predict_level1(base, X.row(i).transpose());
    mu(i) = pb.mean;
    var(i) = pb.var;
  }
  rep.baseline = score(mu, var, truth);
  return rep;
}

// Runs body(0..n-1) on up to `threads` workers (0: all cores). The first exception is
// rethrown after every worker has stopped.
template <class F>
void parallel_for(int n, int threads, F&& body) {
  int nthreads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  nthreads = std::clamp(nthreads, 1, std::max(n, 1));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

inline int cmd_benchmark(const RunConfig& cfg, std::ostream& out) {
  if (cfg.benchmark.empty()) throw ConfigError("benchmark needs --benchmark");
  if (cfg.reps < 1) throw ConfigError("--reps must be positive");
  BenchmarkSetup b;
  b.fn = parse_benchmark(cfg.benchmark);
  b.kind = parse_kernel_kind(cfg.kernel);
  b.schedule = schedule_from(cfg, b.fn);
  b.opt = optimizer_from(cfg);
  b.n_test = cfg.n_test;
  b.t_target = cfg.t_target;
  b.non_nested = cfg.non_nested;
  b.sem_iters = cfg.sem_iters;
  b.sem_draws = cfg.sem_draws;
  if (b.n_test < 1) throw ConfigError("--n-test must be positive");

  // Results are stored by index so the output does not depend on the thread count.
  std::vector<BenchmarkRep> reps(static_cast<std::size_t>(cfg.reps));
  parallel_for(cfg.reps, cfg.threads, [&](int r) {
    reps[static_cast<std::size_t>(r)] =
        benchmark_rep(b, derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
  });

  std::ostringstream o;
  o << "method,seed,rmse,crps\n";
  std::vector<double> dr, dc, br, bc;
  for (const BenchmarkRep& rp : reps) {
    o << "dna," << rp.seed << ',' << format_double(rp.dna.rmse) << ','
      << format_double(rp.dna.mean_crps) << '\n';
    o << "baseline," << rp.seed << ',' << format_double(rp.baseline.rmse) << ','
      << format_double(rp.baseline.mean_crps) << '\n';
    dr.push_back(rp.dna.rmse);
    dc.push_back(rp.dna.mean_crps);
    br.push_back(rp.baseline.rmse);
    bc.push_back(rp.baseline.mean_crps);
  }
  o << "dna,median," << format_double(median(dr)) << ',' << format_double(median(dc)) << '\n';
  o << "baseline,median," << format_double(median(br)) << ',' << format_double(median(bc)) << '\n';
  emit(cfg, o.str(), out);
  return kOk;
}

// ------------------------------------------------------------------ parsing

namespace detail {

template <class T>
void apply_key(const nlohmann::json& j, const std::string& key, T& field, CLI::App& app,
               const std::string& flag) {
  if (!j.contains(key)) return;
  T v;
  try {
    v = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
  const CLI::Option* opt = app.get_option_no_throw(flag);
  if (opt && opt->count() > 0 && !(v == field))
    warn("config file value for '" + key + "' overrides the command-line flag");
  field = v;
}

inline void apply_config_file(const std::string& path, RunConfig& cfg, CLI::App& sub) {
  const nlohmann::json j = read_json_file(path);
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  static const std::vector<std::string> known = {
      "data", "benchmark", "kernel", "model", "inputs", "out", "chain-out", "t-target", "c",
      "gamma", "t-max", "levels", "n-min", "dim", "reps", "n-test", "seed", "non-nested",
      "sem-iters", "sem-draws", "multistarts", "threads"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw ConfigError("unknown config key '" + k + "'");
  apply_key(j, "data", cfg.data, sub, "--data");
  apply_key(j, "benchmark", cfg.benchmark, sub, "--benchmark");
  apply_key(j, "kernel", cfg.kernel, sub, "--kernel");
  apply_key(j, "model", cfg.model, sub, "--model");
  apply_key(j, "inputs", cfg.inputs, sub, "--inputs");
  apply_key(j, "out", cfg.out, sub, "--out");
  apply_key(j, "chain-out", cfg.chain_out, sub, "--chain-out");
  apply_key(j, "t-target", cfg.t_target, sub, "--t-target");
  apply_key(j, "c", cfg.c, sub, "--c");
  apply_key(j, "gamma", cfg.gamma, sub, "--gamma");
  apply_key(j, "t-max", cfg.t_max, sub, "--t-max");
  apply_key(j, "levels", cfg.levels, sub, "--levels");
  apply_key(j, "n-min", cfg.n_min, sub, "--n-min");
  apply_key(j, "dim", cfg.dim, sub, "--dim");
  apply_key(j, "reps", cfg.reps, sub, "--reps");
  apply_key(j, "n-test", cfg.n_test, sub, "--n-test");
  apply_key(j, "seed", cfg.seed, sub, "--seed");
  apply_key(j, "non-nested", cfg.non_nested, sub, "--non-nested");
  apply_key(j, "sem-iters", cfg.sem_iters, sub, "--sem-iters");
  apply_key(j, "sem-draws", cfg.sem_draws, sub, "--sem-draws");
  apply_key(j, "multistarts", cfg.multistarts, sub, "--multistarts");
  apply_key(j, "threads", cfg.threads, sub, "--threads");
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Multi-fidelity emulation with the diffusion non-additive GP model", "dnamf"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string config_path;

  auto add_common = [&](CLI::App* s) {
    s->add_option("--config", config_path, "JSON config file; its values win over flags");
    s->add_option("--seed", cfg.seed, "Random seed");
    s->add_option("--out", cfg.out, "Output path (default: stdout)");
  };
  auto add_schedule = [&](CLI::App* s) {
    s->add_option("--t-max", cfg.t_max, "Largest tuning value t_1");
    s->add_option("--c", cfg.c, "Refinement ratio in (0, 1)");
    s->add_option("--gamma", cfg.gamma, "Sample-size exponent");
    s->add_option("--levels", cfg.levels, "Number of fidelity levels");
    s->add_option("--n-min", cfg.n_min, "Sample size of the finest level");
    s->add_flag("--non-nested", cfg.non_nested, "Independent designs / stochastic EM fitting");
  };
  auto add_sem = [&](CLI::App* s) {
    s->add_option("--sem-iters", cfg.sem_iters, "Stochastic EM iterations M");
    s->add_option("--sem-draws", cfg.sem_draws, "Imputations used for prediction");
  };
  auto add_fit = [&](CLI::App* s) {
    s->add_option("--kernel", cfg.kernel, "sqexp | matern15 | matern25");
    s->add_option("--multistarts", cfg.multistarts, "Optimizer restarts");
  };

  auto* sim = app.add_subcommand("simulate", "Generate a benchmark dataset manifest");
  add_common(sim);
  add_schedule(sim);
  sim->add_option("--benchmark", cfg.benchmark, "additive | nonadditive | currin | borehole");

  auto* des = app.add_subcommand("design", "Generate nested space-filling designs");
  add_common(des);
  add_schedule(des);
  des->add_option("--benchmark", cfg.benchmark, "Benchmark whose domain is used");
  des->add_option("--dim", cfg.dim, "Input dimension (unit cube) when no benchmark is given");

  auto* fitc = app.add_subcommand("fit", "Fit a model and write it as JSON");
  add_common(fitc);
  add_schedule(fitc);
  add_sem(fitc);
  add_fit(fitc);
  fitc->add_option("--data", cfg.data, "Manifest JSON or CSV sidecar (file,t)");
  fitc->add_option("--benchmark", cfg.benchmark, "Simulate a benchmark dataset instead");
  fitc->add_option("--chain-out", cfg.chain_out, "Chain diagnostics CSV (non-nested mode)");

  auto* pred = app.add_subcommand("predict", "Predict with a fitted model");
  add_common(pred);
  add_sem(pred);
  pred->add_option("--model", cfg.model, "Model JSON from 'fit'");
  pred->add_option("--inputs", cfg.inputs, "CSV with header x1..xd");
  pred->add_option("--n-test", cfg.n_test, "Random test points when --inputs is absent");
  pred->add_option("--t-target", cfg.t_target, "Target tuning value (default 0)");

  auto* bench = app.add_subcommand("benchmark", "Repeated benchmark runs with scores");
  add_common(bench);
  add_schedule(bench);
  add_sem(bench);
  add_fit(bench);
  bench->add_option("--benchmark", cfg.benchmark, "additive | nonadditive | currin | borehole");
  bench->add_option("--reps", cfg.reps, "Repetitions");
  bench->add_option("--n-test", cfg.n_test, "Test points per repetition");
  bench->add_option("--t-target", cfg.t_target, "Target tuning value (default 0)");
  bench->add_option("--threads", cfg.threads, "Worker threads (default: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  std::mutex warn_mu;
  struct HandlerGuard {
    WarningHandler old;
    ~HandlerGuard() { set_warning_handler(std::move(old)); }
  } guard{set_warning_handler([&](const std::string& msg) {
    std::lock_guard lock(warn_mu);
    err << "dnamf: warning: " << msg << '\n';
  })};
  try {
    if (!config_path.empty()) detail::apply_config_file(config_path, cfg, *sub);
    if (cfg.command == "simulate") return cmd_simulate(cfg, out);
    if (cfg.command == "design") return cmd_design(cfg, out);
    if (cfg.command == "fit") return cmd_fit(cfg, out, err);
    if (cfg.command == "predict") return cmd_predict(cfg, out);
    if (cfg.command == "benchmark") return cmd_benchmark(cfg, out);
    err << "error: unknown command\n";
    return kConfig;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const OutOfRange& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const DomainViolation& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const NotNested& e) {
    err << "error: " << e.what() << " (use --non-nested)\n";
    return kConfig;
  } catch (const Error& e) {
    err << "error: numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  }
}

}  // namespace dnamf::cli
