#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "dnamf/diagnostics.hpp"
#include "dnamf/dna_fit.hpp"
#include "dnamf/errors.hpp"
#include "dnamf/gaussian.hpp"
#include "dnamf/kernels.hpp"

namespace dnamf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Prediction {
  double mean = 0.0;
  double var = 0.0;
  double t_target = 0.0;
  std::vector<Moments> trace;  // per-level moments, filled when requested
};

// ------------------------------------------------ y-expectations of the kernel

// E[exp(-c (Y - Z)^2 / theta)], Z ~ N(mu, s2).
inline double sqexp_xi(double c, double Y, double theta, double mu, double s2) {
  const double den = theta + 2.0 * c * s2;
  const double dy = Y - mu;
  return std::sqrt(theta / den) * std::exp(-c * dy * dy / den);
}

// E[exp(-c_i (Y_i - Z)^2 / theta - c_k (Y_k - Z)^2 / theta)], Z ~ N(mu, s2).
inline double sqexp_zeta(double ci, double Yi, double ck, double Yk, double theta, double mu,
                         double s2) {
  const double den = theta + 2.0 * (ci + ck) * s2;
  const double di = Yi - mu, dk = Yk - mu, dik = Yi - Yk;
  const double num = ci * di * di + ck * dk * dk + 2.0 / theta * ci * ck * s2 * dik * dik;
  return std::sqrt(theta / den) * std::exp(-num / den);
}

namespace detail {

// p_nu(a0 + a1 w) as a polynomial in w.
inline Poly matern_poly(double nu, double a0, double a1) {
  if (nu == 1.5) return {1.0 + a0, a1, 0.0, 0.0, 0.0};
  return {1.0 + a0 + a0 * a0 / 3.0, a1 + 2.0 * a0 * a1 / 3.0, a1 * a1 / 3.0, 0.0, 0.0};
}

}  // namespace detail

// E[psi(a |Z - Y|)], Z ~ N(mu, s2), psi(r) = p_nu(r) exp(-r).
inline double matern_xi(double nu, double a, double Y, double mu, double s2) {
  if (s2 <= 0.0) return detail::matern_psi(nu, a * std::abs(mu - Y));
  const Poly P = detail::matern_poly(nu, 0.0, a);
  constexpr double inf = std::numeric_limits<double>::infinity();
  return expect_poly_exp(P, -a, mu - Y, s2, inf) + expect_poly_exp(P, -a, Y - mu, s2, inf);
}

// E[psi(a_i |Z - Y_i|) psi(a_k |Z - Y_k|)], Z ~ N(mu, s2).
inline double matern_zeta(double nu, double ai, double Yi, double ak, double Yk, double mu,
                          double s2) {
  if (s2 <= 0.0)
    return detail::matern_psi(nu, ai * std::abs(mu - Yi)) *
           detail::matern_psi(nu, ak * std::abs(mu - Yk));
  if (Yi > Yk) {
    std::swap(Yi, Yk);
    std::swap(ai, ak);
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double gap = Yk - Yi;
  // Z > Y_k, W = Z - Y_k.
  const Poly up = poly_mul(detail::matern_poly(nu, ai * gap, ai), detail::matern_poly(nu, 0.0, ak));
  double total = std::exp(-ai * gap) * expect_poly_exp(up, -(ai + ak), mu - Yk, s2, inf);
  // Z < Y_i, W = Y_i - Z.
  const Poly lo = poly_mul(detail::matern_poly(nu, 0.0, ai), detail::matern_poly(nu, ak * gap, ak));
  total += std::exp(-ak * gap) * expect_poly_exp(lo, -(ai + ak), Yi - mu, s2, inf);
  // Y_i < Z < Y_k, W = Z - Y_i.
  if (gap > 0.0) {
    const Poly mid =
        poly_mul(detail::matern_poly(nu, 0.0, ai), detail::matern_poly(nu, ak * gap, -ak));
    total += std::exp(-ak * gap) * expect_poly_exp(mid, ak - ai, mu - Yi, s2, gap);
  }
  return total;
}

// ------------------------------------------------------------ one transition

namespace detail {

inline double clamp_variance(double v, double tau2, bool strict) {
  if (v < -1e-6 * tau2) {
    if (strict) throw NumericalVariance("posterior variance " + std::to_string(v) + " is negative");
    warn("posterior variance clamped from " + std::to_string(v));
  }
  return std::max(v, 0.0);
}

struct StepTerms {
  QueryFactors qf;
  VectorXd xi;  // E[y-factor_i]
  double mu = 0.0;
  double s2 = 0.0;
};

inline double y_expect(const DnaModel& m, double c, double Y, double mu, double s2) {
  if (m.kind == KernelKind::SqExp) return sqexp_xi(c, Y, m.hyper.theta_y, mu, s2);
  return matern_xi(matern_nu(m.kind), c, Y, mu, s2);
}

inline double y_expect2(const DnaModel& m, double ci, double Yi, double ck, double Yk, double mu,
                        double s2) {
  if (m.kind == KernelKind::SqExp) return sqexp_zeta(ci, Yi, ck, Yk, m.hyper.theta_y, mu, s2);
  return matern_zeta(matern_nu(m.kind), ci, Yi, ck, Yk, mu, s2);
}

inline StepTerms step_terms(const DnaModel& m, const VectorXd& x, double t, double mu, double s2) {
  StepTerms st;
  st.mu = mu;
  st.s2 = s2;
  st.qf = query_factors(m.assembly.inputs, m.hyper, m.kind, t, x);
  const Eigen::Index n = m.assembly.size();
  st.xi.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    st.xi(i) = y_expect(m, st.qf.c(i), m.assembly.inputs.y(i), mu, s2);
  return st;
}

inline double h1_from(const DnaModel& m, const StepTerms& st) {
  return m.alpha + (m.weights.array() * st.qf.w.array() * st.xi.array()).sum();
}

// h2 rearranged as tau2 (1 - |L^{-1} m|^2) + sum_ik (r_i r_k - tau2 Kinv_ik) C_ik, where m = E[k]
// and C = E[k k^T] - m m^T. Algebraically identical to the zeta form but avoids cancelling
// O(cond K) terms, and is exactly the conditional GP variance when s2 = 0.
inline double h2_raw_from(const DnaModel& m, const StepTerms& st) {
  const Eigen::Index n = m.assembly.size();
  const auto& Y = m.assembly.inputs.y;
  const auto& w = st.qf.w;
  const auto& c = st.qf.c;
  const VectorXd mbar = w.cwiseProduct(st.xi);
  double out = m.tau2 * (1.0 - solve_lower(m.factor, mbar).squaredNorm());
  if (st.s2 <= 0.0) return out;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (w(i) == 0.0) continue;
    for (Eigen::Index k = 0; k <= i; ++k) {
      if (w(k) == 0.0) continue;
      const double coef = m.weights(i) * m.weights(k) - m.tau2 * m.k_inv(i, k);
      const double z = y_expect2(m, c(i), Y(i), c(k), Y(k), st.mu, st.s2);
      acc += (i == k ? 1.0 : 2.0) * coef * w(i) * w(k) * (z - st.xi(i) * st.xi(k));
    }
  }
  return out + acc;
}

}  // namespace detail

// Posterior mean after one transition to tuning value t, given f_{l-1}(x) ~ N(mu, s2).
inline double h1(const DnaModel& m, const VectorXd& x, double t, double mu, double s2) {
  return detail::h1_from(m, detail::step_terms(m, x, t, mu, s2));
}

inline Moments posterior_step(const DnaModel& m, const VectorXd& x, double t, double mu,
                              double s2) {
  if (s2 < 0.0) throw std::invalid_argument("posterior_step: negative input variance");
  const auto st = detail::step_terms(m, x, t, mu, s2);
  Moments out;
  out.mean = detail::h1_from(m, st);
  out.var = detail::clamp_variance(detail::h2_raw_from(m, st), m.tau2, true);
  return out;
}

// Posterior variance after one transition. Throws NumericalVariance below -1e-6 tau2.
inline double h2(const DnaModel& m, const VectorXd& x, double t, double mu, double s2) {
  return posterior_step(m, x, t, mu, s2).var;
}

// Same quantities; the kind is taken from the model, these names mirror the Matern closed forms.
inline double h1_matern(const DnaModel& m, const VectorXd& x, double t, double mu, double s2) {
  if (m.kind == KernelKind::SqExp) throw std::invalid_argument("h1_matern: model is SqExp");
  return h1(m, x, t, mu, s2);
}

inline double h2_matern(const DnaModel& m, const VectorXd& x, double t, double mu, double s2) {
  if (m.kind == KernelKind::SqExp) throw std::invalid_argument("h2_matern: model is SqExp");
  return h2(m, x, t, mu, s2);
}

// Conditional GP moments of W(t, x, y) given the training data (no input uncertainty).
inline Moments conditional_gp(const DnaModel& m, const VectorXd& x, double t, double y) {
  const auto qf = query_factors(m.assembly.inputs, m.hyper, m.kind, t, x);
  const Eigen::Index n = m.assembly.size();
  VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i)
    k(i) = qf.w(i) * y_factor(m.kind, m.hyper, qf.c(i), y - m.assembly.inputs.y(i));
  Moments out;
  out.mean = m.alpha + k.dot(m.weights);
  out.var = m.tau2 * (1.0 - solve_lower(m.factor, k).squaredNorm());
  return out;
}

// ------------------------------------------------------------------ recursion

// Index of the level whose tuning value equals t (relative tolerance), or -1.
inline int level_index(const MultiFidelityData& data, double t) {
  const double scale = data.level(0).t;
  for (int l = 0; l < data.num_levels(); ++l)
    if (std::abs(data.level(l).t - t) <= 1e-12 * scale) return l;
  return -1;
}

inline void check_target(const MultiFidelityData& data, double t) {
  if (!std::isfinite(t) || t < 0.0) throw OutOfRange("target tuning value must be >= 0");
  if (level_index(data, t) >= 0) return;
  if (t >= data.level(data.num_levels() - 1).t)
    throw OutOfRange("target tuning value " + std::to_string(t) +
                     " is neither a level value nor below the finest level");
}

inline Prediction propagate(const DnaModel& m, const VectorXd& x, double t_target,
                            bool keep_trace = false) {
  if (x.size() != m.dim()) throw std::invalid_argument("propagate: dimension mismatch");
  check_target(m.data, t_target);
  const int target_level = level_index(m.data, t_target);
  const int last = target_level >= 0 ? target_level : m.num_levels() - 1;
  Prediction p;
  p.t_target = t_target;
  Moments cur = predict_level1(m.level1, x);
  if (keep_trace) p.trace.push_back(cur);
  for (int l = 1; l <= last; ++l) {
    cur = posterior_step(m, x, m.data.level(l).t, cur.mean, cur.var);
    if (keep_trace) p.trace.push_back(cur);
  }
  if (target_level < 0) cur = posterior_step(m, x, t_target, cur.mean, cur.var);
  p.mean = cur.mean;
  p.var = cur.var;
  return p;
}

inline std::vector<Prediction> predict_batch(const DnaModel& m, const MatrixXd& X,
                                             double t_target) {
  std::vector<Prediction> out;
  out.reserve(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    out.push_back(propagate(m, X.row(i).transpose(), t_target));
  return out;
}

}  // namespace dnamf
