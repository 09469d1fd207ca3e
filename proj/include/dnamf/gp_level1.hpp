#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>

#include "dnamf/diagnostics.hpp"
#include "dnamf/errors.hpp"
#include "dnamf/kernels.hpp"
#include "dnamf/linalg.hpp"
#include "dnamf/optimizer.hpp"

namespace dnamf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

struct Level1Model {
  MatrixXd X;
  VectorXd y;
  double alpha = 0.0;
  double tau2 = 0.0;
  Level1Hyper hyper;
  SpdFactor factor;
  VectorXd weights;          // K^{-1}(y - alpha 1)
  bool degenerate = false;   // constant outputs: tau2 = 0, prediction is the constant
  double neg_loglik = 0.0;   // profile objective at hyper (0 when degenerate)
};

struct MeanScale {
  double alpha = 0.0;
  double tau2 = 0.0;
};

// GLS mean and profile scale for outputs y under correlation factor F.
inline MeanScale mle_mean_scale(const VectorXd& y, const SpdFactor& F) {
  const VectorXd ones = VectorXd::Ones(y.size());
  const VectorXd ki1 = solve(F, ones);
  MeanScale ms;
  ms.alpha = ki1.dot(y) / ki1.sum();
  const VectorXd r = y - ms.alpha * ones;
  ms.tau2 = solve_lower(F, r).squaredNorm() / static_cast<double>(y.size());
  return ms;
}

namespace detail {

inline bool is_constant(const VectorXd& y) {
  return y.size() > 0 && (y.array() == y(0)).all();
}

inline Bounds level1_bounds(const MatrixXd& X) {
  const Eigen::Index d = X.cols();
  Bounds b{VectorXd(d), VectorXd(d)};
  for (Eigen::Index j = 0; j < d; ++j) {
    double r = X.col(j).maxCoeff() - X.col(j).minCoeff();
    if (!(r > 0.0)) r = 1.0;
    b.lower(j) = std::log(1e-2 * r * r);
    b.upper(j) = std::log(1e2 * r * r);
  }
  return b;
}

}  // namespace detail

// Profile negative log-likelihood (constants dropped) and its gradient in log theta.
inline double level1_objective(const MatrixXd& X, const VectorXd& y, const VectorXd& log_theta,
                               VectorXd* grad) {
  Level1Hyper h{log_theta.array().exp().matrix()};
  const MatrixXd K = gram_level1(X, h);
  SpdFactor F;
  try {
    F = cholesky(K);
  } catch (const NotPositiveDefinite&) {
    if (grad) grad->setZero(log_theta.size());
    return std::numeric_limits<double>::infinity();
  }
  const auto n = static_cast<double>(y.size());
  const MeanScale ms = mle_mean_scale(y, F);
  const double Q = ms.tau2 * n;
  if (!(Q > 0.0)) throw DegenerateData("level-1 outputs are constant");
  const double value = 0.5 * log_det(F) + 0.5 * n * std::log(Q);
  if (grad) {
    const VectorXd a = solve(F, VectorXd(y.array() - ms.alpha));
    const MatrixXd Kinv = inverse(F);
    const auto dK = gram_level1_grads(X, h, K);
    grad->resize(log_theta.size());
    for (Eigen::Index j = 0; j < log_theta.size(); ++j) {
      const auto& G = dK[static_cast<std::size_t>(j)];
      const double tr = (Kinv.array() * G.array()).sum();
      const double quad = a.dot(G * a);
      (*grad)(j) = (0.5 * tr - 0.5 * n * quad / Q) * h.theta(j);
    }
  }
  return value;
}

inline Level1Model make_level1(const MatrixXd& X, const VectorXd& y, const Level1Hyper& h) {
  Level1Model m;
  m.X = X;
  m.y = y;
  m.hyper = h;
  m.factor = cholesky(gram_level1(X, h));
  if (detail::is_constant(y)) {
    m.degenerate = true;
    m.alpha = y(0);
    m.tau2 = 0.0;
    m.weights = VectorXd::Zero(y.size());
    return m;
  }
  const MeanScale ms = mle_mean_scale(y, m.factor);
  m.alpha = ms.alpha;
  m.tau2 = ms.tau2;
  m.weights = solve(m.factor, VectorXd(y.array() - m.alpha));
  m.neg_loglik = level1_objective(X, y, h.theta.array().log().matrix(), nullptr);
  return m;
}

// Model at fixed mean and scale (no estimation).
inline Level1Model make_level1(const MatrixXd& X, const VectorXd& y, const Level1Hyper& h,
                               double alpha, double tau2) {
  Level1Model m;
  m.X = X;
  m.y = y;
  m.hyper = h;
  m.factor = cholesky(gram_level1(X, h));
  m.alpha = alpha;
  m.tau2 = tau2;
  m.degenerate = !(tau2 > 0.0);
  m.weights = m.degenerate ? VectorXd::Zero(y.size())
                           : solve(m.factor, VectorXd(y.array() - alpha));
  if (!m.degenerate && !detail::is_constant(y))
    m.neg_loglik = level1_objective(X, y, h.theta.array().log().matrix(), nullptr);
  return m;
}

inline Level1Model fit_level1(const MatrixXd& X, const VectorXd& y, const OptimizerConfig& opt,
                              std::uint64_t seed) {
  if (X.rows() != y.size() || X.rows() < 1) throw std::invalid_argument("fit_level1: bad sizes");
  const Bounds box = opt.bounds ? *opt.bounds : detail::level1_bounds(X);
  if (detail::is_constant(y)) {
    if (X.rows() > 1) warn("GP training outputs are constant; using a constant-mean model");
    // Nothing to estimate; keep the mid-box lengthscales.
    Level1Hyper h{(0.5 * (box.lower + box.upper)).array().exp().matrix()};
    return make_level1(X, y, h);
  }
  OptimizerConfig cfg = opt;
  cfg.seed = seed;
  Objective fg = [&](const VectorXd& p, VectorXd& g) { return level1_objective(X, y, p, &g); };
  const auto ms = minimize_multistart(fg, box, cfg);
  Level1Hyper h{ms.best.x.array().exp().matrix()};
  return make_level1(X, y, h);
}

inline VectorXd level1_cross(const Level1Model& m, const VectorXd& x) {
  VectorXd k(m.X.rows());
  for (Eigen::Index i = 0; i < m.X.rows(); ++i) k(i) = k1(x, m.X.row(i).transpose(), m.hyper);
  return k;
}

inline Moments predict_level1(const Level1Model& m, const VectorXd& x) {
  if (x.size() != m.X.cols()) throw std::invalid_argument("predict_level1: dimension mismatch");
  if (m.degenerate) return {m.alpha, 0.0};
  const VectorXd k = level1_cross(m, x);
  Moments out;
  out.mean = m.alpha + k.dot(m.weights);
  const double v = m.tau2 * (1.0 - solve_lower(m.factor, k).squaredNorm());
  if (v < -1e-6 * m.tau2) warn("level-1 variance clamped from " + std::to_string(v));
  out.var = std::max(v, 0.0);
  return out;
}

// Joint posterior over the rows of Xq.
inline std::pair<VectorXd, MatrixXd> posterior_level1_joint(const Level1Model& m,
                                                            const MatrixXd& Xq) {
  const Eigen::Index q = Xq.rows();
  VectorXd mean(q);
  MatrixXd cov = MatrixXd::Zero(q, q);
  if (m.degenerate) {
    mean.setConstant(m.alpha);
    return {mean, cov};
  }
  MatrixXd Kq(m.X.rows(), q);
  for (Eigen::Index i = 0; i < q; ++i) Kq.col(i) = level1_cross(m, Xq.row(i).transpose());
  mean = (Kq.transpose() * m.weights).array() + m.alpha;
  const MatrixXd V = m.factor.lower().triangularView<Eigen::Lower>().solve(Kq);
  cov = gram_level1(Xq, m.hyper) - V.transpose() * V;
  cov *= m.tau2;
  return {mean, cov};
}

}  // namespace dnamf
