#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dnamf/dna_fit.hpp"
#include "dnamf/dna_predict.hpp"
#include "dnamf/kernels.hpp"
#include "dnamf/random.hpp"

// Brute-force sampling of the level recursion. Only the plain conditional GP of each
// level is used, evaluated from kernel values, so it shares no integration code with
// the closed-form recursion.

namespace dnamf {

using Eigen::VectorXd;

enum class McMode {
  Full,           // exact chain f_1 -> f_2 -> ... -> f_target
  MomentMatched,  // re-Gaussianize after every level, as the closed form does
};

struct McConfig {
  std::size_t n_samples = 1'000'000;
  std::uint64_t seed = 0;
  McMode mode = McMode::MomentMatched;
  std::size_t chunks = 20;       // independent batches for the MomentMatched error estimate
  bool keep_level_moments = false;
};

struct McResult {
  double mean = 0.0;
  double var = 0.0;
  double se_mean = 0.0;
  double se_var = 0.0;
  std::vector<Moments> levels;  // per-level estimates when requested
};

namespace detail {

// Conditional moments of W(t, x, .) at arbitrary y, with the y-free part cached.
class ConditionalSampler {
 public:
  ConditionalSampler(const DnaModel& m, const VectorXd& x, double t) : m_(m) {
    const auto& in = m.assembly.inputs;
    const Eigen::Index n = in.size();
    base_.resize(n);
    scale_.resize(n);
    const double nu = m.kind == KernelKind::SqExp ? 0.0 : matern_nu(m.kind);
    for (Eigen::Index i = 0; i < n; ++i) {
      AugmentedPoint q{t, x, in.y(i)};
      AugmentedPoint p{in.t(i), in.X.row(i).transpose(), in.y(i)};
      base_(i) = k_nonsep(q, p, m.hyper, m.kind);
      const double dt = t - in.t(i);
      const double u = 1.0 / (1.0 + dt * dt / m.hyper.theta_t);
      scale_(i) = m.kind == KernelKind::SqExp
                      ? std::pow(u, m.hyper.beta) / m.hyper.theta_y
                      : std::sqrt(2.0 * nu) * std::pow(u, 0.5 * m.hyper.beta) / m.hyper.theta_y;
    }
    k_.resize(n);
  }

  Moments at(double y) {
    const auto& Y = m_.assembly.inputs.y;
    const Eigen::Index n = Y.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = y - Y(i);
      double f;
      if (m_.kind == KernelKind::SqExp) {
        f = std::exp(-scale_(i) * r * r);
      } else {
        const double a = scale_(i) * std::abs(r);
        f = m_.kind == KernelKind::Matern15 ? (1.0 + a) * std::exp(-a)
                                            : (1.0 + a + a * a / 3.0) * std::exp(-a);
      }
      k_(i) = base_(i) * f;
    }
    Moments out;
    out.mean = m_.alpha + k_.dot(m_.weights);
    const double q = k_.dot(m_.k_inv.selfadjointView<Eigen::Lower>() * k_);
    out.var = std::max(m_.tau2 * (1.0 - q), 0.0);
    return out;
  }

 private:
  const DnaModel& m_;
  VectorXd base_, scale_, k_;
};

inline std::vector<double> transition_grid(const DnaModel& m, double t_target) {
  check_target(m.data, t_target);
  const int target = level_index(m.data, t_target);
  const int last = target >= 0 ? target : m.num_levels() - 1;
  std::vector<double> ts;
  for (int l = 1; l <= last; ++l) ts.push_back(m.data.level(l).t);
  if (target < 0) ts.push_back(t_target);
  return ts;
}

struct SampleStats {
  double mean = 0.0, var = 0.0, se_mean = 0.0, se_var = 0.0;
};

inline SampleStats sample_stats(const std::vector<double>& f) {
  const auto n = static_cast<double>(f.size());
  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : f) {
    const double d = v - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  SampleStats s;
  s.mean = mean;
  s.var = m2 / (n - 1.0);
  m2 /= n;
  m4 /= n;
  s.se_mean = std::sqrt(m2 / n);
  s.se_var = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
  return s;
}

}  // namespace detail

inline McResult mc_propagate(const DnaModel& m, const VectorXd& x, double t_target,
                             const McConfig& cfg) {
  if (cfg.n_samples < 1000) throw std::invalid_argument("mc_propagate: n_samples must be >= 1000");
  const auto ts = detail::transition_grid(m, t_target);
  const Moments first = predict_level1(m.level1, x);
  std::vector<detail::ConditionalSampler> steps;
  for (double t : ts) steps.emplace_back(m, x, t);

  McResult res;
  if (cfg.mode == McMode::Full) {
    Rng rng(derive_seed(cfg.seed, 0));
    NormalSampler normal;
    std::vector<double> f(cfg.n_samples);
    const double s1 = std::sqrt(first.var);
    for (auto& v : f) v = first.mean + s1 * normal(rng);
    if (cfg.keep_level_moments) {
      const auto st = detail::sample_stats(f);
      res.levels.push_back({st.mean, st.var});
    }
    for (auto& step : steps) {
      for (auto& v : f) {
        const Moments c = step.at(v);
        v = c.mean + std::sqrt(c.var) * normal(rng);
      }
      if (cfg.keep_level_moments) {
        const auto st = detail::sample_stats(f);
        res.levels.push_back({st.mean, st.var});
      }
    }
    const auto st = detail::sample_stats(f);
    res.mean = st.mean;
    res.var = st.var;
    res.se_mean = st.se_mean;
    res.se_var = st.se_var;
    return res;
  }

  const std::size_t chunks = std::max<std::size_t>(cfg.chunks, 2);
  const std::size_t per = cfg.n_samples / chunks;
  std::vector<double> cm(chunks), cv(chunks);
  std::vector<Moments> level_sum(steps.size() + 1);
  for (std::size_t c = 0; c < chunks; ++c) {
    Rng rng(derive_seed(cfg.seed, c));
    NormalSampler normal;
    Moments cur = first;
    level_sum[0].mean += cur.mean;
    level_sum[0].var += cur.var;
    for (std::size_t s = 0; s < steps.size(); ++s) {
      const double sd = std::sqrt(cur.var);
      double sum_mu = 0.0, sum_mu2 = 0.0, sum_var = 0.0;
      for (std::size_t i = 0; i < per; ++i) {
        const Moments cond = steps[s].at(cur.mean + sd * normal(rng));
        sum_mu += cond.mean;
        sum_mu2 += cond.mean * cond.mean;
        sum_var += cond.var;
      }
      const auto n = static_cast<double>(per);
      const double mu = sum_mu / n;
      cur.mean = mu;
      cur.var = sum_var / n + std::max(sum_mu2 / n - mu * mu, 0.0);
      level_sum[s + 1].mean += cur.mean;
      level_sum[s + 1].var += cur.var;
    }
    cm[c] = cur.mean;
    cv[c] = cur.var;
  }
  auto mean_se = [&](const std::vector<double>& v, double& mean, double& se) {
    mean = 0.0;
    for (double a : v) mean += a;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double a : v) ss += (a - mean) * (a - mean);
    se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  };
  mean_se(cm, res.mean, res.se_mean);
  mean_se(cv, res.var, res.se_var);
  if (cfg.keep_level_moments)
    for (auto& l : level_sum)
      res.levels.push_back({l.mean / static_cast<double>(chunks), l.var / static_cast<double>(chunks)});
  return res;
}

// One transition from f ~ N(mu, s2): Rao-Blackwellized estimates of the mean E[mu_l(Z)]
// and the variance E[s_l^2(Z)] + Var[mu_l(Z)], with delta-method standard errors.
inline McResult mc_transition(const DnaModel& m, const VectorXd& x, double t, double mu,
                              double s2, const McConfig& cfg) {
  detail::ConditionalSampler step(m, x, t);
  Rng rng(derive_seed(cfg.seed, 0));
  NormalSampler normal;
  const double sd = std::sqrt(s2);
  const std::size_t n = cfg.n_samples;
  // Running sums for (a, b, c) = (s^2, mu, mu^2), centered by a first-sample shift.
  double a0 = 0.0, b0 = 0.0;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Matrix3d sum2 = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Moments c = step.at(mu + sd * normal(rng));
    if (i == 0) {
      a0 = c.var;
      b0 = c.mean;
    }
    const Eigen::Vector3d v(c.var - a0, c.mean - b0, (c.mean - b0) * (c.mean - b0));
    sum += v;
    sum2 += v * v.transpose();
  }
  const auto nn = static_cast<double>(n);
  const Eigen::Vector3d mean = sum / nn;
  const Eigen::Matrix3d cov = sum2 / nn - mean * mean.transpose();
  McResult r;
  // With centered b' = b - b0: Var = E[b'^2] - E[b']^2.
  r.mean = b0 + mean(1);
  r.var = a0 + mean(0) + mean(2) - mean(1) * mean(1);
  r.se_mean = std::sqrt(std::max(cov(1, 1), 0.0) / nn);
  const Eigen::Vector3d g(1.0, -2.0 * mean(1), 1.0);
  r.se_var = std::sqrt(std::max(g.dot(cov * g), 0.0) / nn);
  return r;
}

}  // namespace dnamf
