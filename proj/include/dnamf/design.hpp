#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "dnamf/dataset.hpp"
#include "dnamf/errors.hpp"
#include "dnamf/random.hpp"

namespace dnamf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ------------------------------------------------------------------ schedules

struct Schedule {
  std::vector<double> t;  // t_1 > ... > t_L
  std::vector<int> n;     // n_1 >= ... >= n_L
  double c = 0.0;
  double gamma = 0.0;
};

inline int round_half_away(double v) {
  return static_cast<int>(v < 0.0 ? -std::floor(-v + 0.5) : std::floor(v + 0.5));
}

// Sizes follow n_l = round(n_min * c^{-gamma (L - l)}): rounding is applied to the
// unrounded geometric sequence, not recursively.
inline Schedule make_schedule(double t_max, double c, double gamma, int n_min, int L) {
  if (!(c > 0.0 && c < 1.0)) throw ConfigError("refinement ratio c must lie in (0, 1)");
  if (!(gamma > 0.0)) throw ConfigError("size exponent gamma must be positive");
  if (n_min < 1) throw ConfigError("n_min must be at least 1");
  if (L < 2) throw ConfigError("at least two levels are required");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("t_max must be positive");
  Schedule s;
  s.c = c;
  s.gamma = gamma;
  for (int l = 0; l < L; ++l) {
    s.t.push_back(l == 0 ? t_max : s.t.back() * c);
    s.n.push_back(round_half_away(n_min * std::pow(c, -gamma * (L - 1 - l))));
  }
  return s;
}

// ----------------------------------------------------------------- benchmarks

enum class BenchmarkFn { Additive, NonAdditive, Currin, Borehole };

inline std::string to_string(BenchmarkFn f) {
  switch (f) {
    case BenchmarkFn::Additive: return "additive";
    case BenchmarkFn::NonAdditive: return "nonadditive";
    case BenchmarkFn::Currin: return "currin";
    case BenchmarkFn::Borehole: return "borehole";
  }
  return "unknown";
}

inline BenchmarkFn parse_benchmark(std::string_view s) {
  if (s == "additive") return BenchmarkFn::Additive;
  if (s == "nonadditive") return BenchmarkFn::NonAdditive;
  if (s == "currin") return BenchmarkFn::Currin;
  if (s == "borehole") return BenchmarkFn::Borehole;
  throw ConfigError("unknown benchmark '" + std::string(s) + "'");
}

struct Domain {
  VectorXd lower;
  VectorXd upper;
};

inline int benchmark_dim(BenchmarkFn f) {
  switch (f) {
    case BenchmarkFn::Additive:
    case BenchmarkFn::NonAdditive: return 1;
    case BenchmarkFn::Currin: return 2;
    case BenchmarkFn::Borehole: return 8;
  }
  return 0;
}

// Borehole order: r_w, r, T_u, H_u, T_l, H_l, L, K_w.
inline Domain benchmark_domain(BenchmarkFn f) {
  const int d = benchmark_dim(f);
  Domain dom{VectorXd::Zero(d), VectorXd::Ones(d)};
  if (f == BenchmarkFn::Borehole) {
    dom.lower << 0.05, 100, 63070, 990, 63.1, 700, 1120, 9855;
    dom.upper << 0.15, 50000, 115600, 1110, 116, 820, 1680, 12045;
  }
  return dom;
}

// Default level count and smallest sample size per benchmark.
struct BenchmarkDefaults {
  int levels;
  int n_min;
};

inline BenchmarkDefaults benchmark_defaults(BenchmarkFn f) {
  switch (f) {
    case BenchmarkFn::Additive:
    case BenchmarkFn::NonAdditive: return {5, 1};
    case BenchmarkFn::Currin: return {6, 2};
    case BenchmarkFn::Borehole: return {6, 2};
  }
  return {5, 1};
}

inline double eval_benchmark(BenchmarkFn f, double t, const VectorXd& x) {
  const int d = benchmark_dim(f);
  if (x.size() != d) throw DomainViolation("benchmark input has the wrong dimension");
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainViolation("tuning value must be >= 0");
  const Domain dom = benchmark_domain(f);
  for (int j = 0; j < d; ++j) {
    const double slack = 1e-12 * (dom.upper(j) - dom.lower(j));
    if (!(x(j) >= dom.lower(j) - slack && x(j) <= dom.upper(j) + slack))
      throw DomainViolation("benchmark input outside its domain");
  }
  constexpr double pi = std::numbers::pi;
  switch (f) {
    case BenchmarkFn::Additive:
      return std::exp(-1.4 * x(0)) * std::cos(3.5 * pi * x(0)) + t * t * std::sin(40.0 * x(0)) / 10.0;
    case BenchmarkFn::NonAdditive:
      return std::sin(10.0 * pi * x(0) / (5.0 + t)) + 0.2 * std::sin(8.0 * pi * x(0));
    case BenchmarkFn::Currin: {
      const double x1 = x(0), x2 = x(1);
      const double ratio = (2300 * x1 * x1 * x1 + 1900 * x1 * x1 + 2092 * x1 + 60) /
                           (100 * x1 * x1 * x1 + 500 * x1 * x1 + 4 * x1 + 20);
      const double e2 = x2 > 0.0 ? std::exp(-1.0 / (2.0 * x2)) : 0.0;
      return (std::exp(-4.0 * t) - e2) * ratio;
    }
    case BenchmarkFn::Borehole: {
      const double rw = x(0), r = x(1), Tu = x(2), Hu = x(3), Tl = x(4), Hl = x(5), L = x(6),
                   Kw = x(7);
      const double lg = std::log(r / rw);
      return (2.0 * pi - t * t) * Tu * (Hu - Hl) /
             (lg * (1.0 + t * t + 2.0 * L * Tu / (lg * rw * rw * Kw) + Tu / Tl));
    }
  }
  return 0.0;
}

// --------------------------------------------------------------- nested design

inline double min_pairwise_distance(const MatrixXd& X) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index k = 0; k < i; ++k) best = std::min(best, (X.row(i) - X.row(k)).norm());
  return best;
}

// Best of several random Latin hypercubes by the maximin criterion, in [0,1]^d.
inline MatrixXd maximin_lhs(int n, int d, Rng& rng, int candidates = 50) {
  MatrixXd best;
  double best_score = -1.0;
  for (int c = 0; c < candidates; ++c) {
    MatrixXd X = latin_hypercube(n, d, rng);
    const double s = n > 1 ? min_pairwise_distance(X) : 0.0;
    if (s > best_score) {
      best_score = s;
      best = std::move(X);
    }
  }
  return best;
}

// Row order of X such that the first n_l rows are a greedy farthest-point subset of the
// first n_{l-1} rows, for every l.
inline std::vector<int> nested_order(const MatrixXd& X, const std::vector<int>& n) {
  std::vector<int> order(static_cast<std::size_t>(X.rows()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  auto row = [&](int i) { return X.row(i); };
  for (std::size_t l = 1; l < n.size(); ++l) {
    const auto pool = static_cast<std::size_t>(n[l - 1]);
    const auto keep = static_cast<std::size_t>(n[l]);
    const std::vector<int> cand(order.begin(), order.begin() + static_cast<long>(pool));
    // Seed with the point closest to the pool centroid.
    Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(X.cols());
    for (int c : cand) centroid += row(c);
    centroid /= static_cast<double>(pool);
    std::size_t next = 0;
    for (std::size_t i = 1; i < pool; ++i)
      if ((row(cand[i]) - centroid).norm() < (row(cand[next]) - centroid).norm()) next = i;
    std::vector<double> dist(pool, std::numeric_limits<double>::infinity());
    std::vector<bool> used(pool, false);
    std::vector<int> chosen, rest;
    for (std::size_t s = 0; s < keep; ++s) {
      used[next] = true;
      chosen.push_back(cand[next]);
      for (std::size_t i = 0; i < pool; ++i)
        dist[i] = std::min(dist[i], (row(cand[i]) - row(cand[next])).norm());
      double far = -1.0;
      for (std::size_t i = 0; i < pool; ++i)
        if (!used[i] && dist[i] > far) {
          far = dist[i];
          next = i;
        }
    }
    for (std::size_t i = 0; i < pool; ++i)
      if (!used[i]) rest.push_back(cand[i]);
    std::copy(chosen.begin(), chosen.end(), order.begin());
    std::copy(rest.begin(), rest.end(), order.begin() + static_cast<long>(keep));
  }
  return order;
}

inline MatrixXd to_domain(const MatrixXd& U, const Domain& dom) {
  MatrixXd X(U.rows(), U.cols());
  for (Eigen::Index j = 0; j < U.cols(); ++j)
    X.col(j) = dom.lower(j) + U.col(j).array() * (dom.upper(j) - dom.lower(j));
  return X;
}

// Nested designs X_1 ⊇ ... ⊇ X_L; X_l is the first n_l rows of X_1.
inline std::vector<MatrixXd> nested_design(const std::vector<int>& n, int d, const Domain& dom,
                                           std::uint64_t seed) {
  if (n.empty()) throw ConfigError("nested_design: empty size vector");
  for (std::size_t l = 0; l < n.size(); ++l) {
    if (n[l] < 1) throw ConfigError("nested_design: sizes must be positive");
    if (l > 0 && n[l] > n[l - 1]) throw ConfigError("nested_design: sizes must be non-increasing");
  }
  Rng rng(derive_seed(seed, 0xde51));
  const MatrixXd U = maximin_lhs(n[0], d, rng);
  const auto order = nested_order(U, n);
  MatrixXd Uo(U.rows(), U.cols());
  for (Eigen::Index i = 0; i < U.rows(); ++i) Uo.row(i) = U.row(order[static_cast<std::size_t>(i)]);
  const MatrixXd X1 = to_domain(Uo, dom);
  std::vector<MatrixXd> out;
  for (int nl : n) out.push_back(X1.topRows(nl));
  return out;
}

// Independent maximin designs per level (non-nested).
inline std::vector<MatrixXd> independent_design(const std::vector<int>& n, int d,
                                                const Domain& dom, std::uint64_t seed) {
  std::vector<MatrixXd> out;
  for (std::size_t l = 0; l < n.size(); ++l) {
    Rng rng(derive_seed(seed, 0x1d00 + l));
    out.push_back(to_domain(maximin_lhs(n[l], d, rng), dom));
  }
  return out;
}

inline MultiFidelityData generate_benchmark_data(BenchmarkFn f, const Schedule& s,
                                                 std::uint64_t seed, bool nested = true) {
  const int d = benchmark_dim(f);
  const Domain dom = benchmark_domain(f);
  const auto designs = nested ? nested_design(s.n, d, dom, seed) : independent_design(s.n, d, dom, seed);
  std::vector<FidelityLevel> levels;
  for (std::size_t l = 0; l < designs.size(); ++l) {
    FidelityLevel lv;
    lv.t = s.t[l];
    lv.X = designs[l];
    lv.y.resize(lv.X.rows());
    for (Eigen::Index i = 0; i < lv.X.rows(); ++i)
      lv.y(i) = eval_benchmark(f, lv.t, lv.X.row(i).transpose());
    levels.push_back(std::move(lv));
  }
  return MultiFidelityData(std::move(levels));
}

// Uniform random test inputs in the benchmark domain.
inline MatrixXd random_inputs(BenchmarkFn f, int n, std::uint64_t seed) {
  const int d = benchmark_dim(f);
  Rng rng(derive_seed(seed, 0x7e57));
  MatrixXd U(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) U(i, j) = uniform01(rng);
  return to_domain(U, benchmark_domain(f));
}

}  // namespace dnamf
