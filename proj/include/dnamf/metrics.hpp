#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dnamf/gaussian.hpp"

namespace dnamf {

using Eigen::VectorXd;

struct ScoreReport {
  double rmse = 0.0;
  double mean_crps = 0.0;
  Eigen::Index n_points = 0;
  VectorXd residuals;  // prediction - truth
};

inline double rmse(const VectorXd& pred, const VectorXd& truth) {
  if (pred.size() != truth.size() || pred.size() == 0)
    throw std::invalid_argument("rmse: lengths differ or are zero");
  // Plain left-to-right sum so the result does not depend on SIMD reduction order.
  double ss = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) ss += (pred(i) - truth(i)) * (pred(i) - truth(i));
  return std::sqrt(ss / static_cast<double>(pred.size()));
}

inline double crps_gaussian(double mu, double var, double y) {
  if (var < 0.0) throw std::invalid_argument("crps_gaussian: negative variance");
  if (var == 0.0) return std::abs(y - mu);
  const double s = std::sqrt(var);
  const double z = (y - mu) / s;
  const double v = s * (z * (2.0 * norm_cdf(z) - 1.0) + 2.0 * norm_pdf(z) -
                        1.0 / std::sqrt(std::numbers::pi));
  return std::max(v, 0.0);
}

inline ScoreReport score(const VectorXd& mean, const VectorXd& var, const VectorXd& truth,
                         bool keep_residuals = false) {
  if (mean.size() != var.size()) throw std::invalid_argument("score: lengths differ");
  ScoreReport r;
  r.rmse = rmse(mean, truth);
  double c = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) c += crps_gaussian(mean(i), var(i), truth(i));
  r.mean_crps = c / static_cast<double>(mean.size());
  r.n_points = mean.size();
  if (keep_residuals) r.residuals = mean - truth;
  return r;
}

}  // namespace dnamf
