#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "dnamf/errors.hpp"
#include "dnamf/random.hpp"

namespace dnamf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Bounds {
  VectorXd lower;
  VectorXd upper;
};

struct OptimizerConfig {
  int multistarts = 5;
  int max_iterations = 200;
  double gradient_tolerance = 1e-6;
  // Overrides the default box, in the working parameterization (log theta, raw beta/delta).
  std::optional<Bounds> bounds;
  std::uint64_t seed = 0;
  // Warm starts, tried before the default starts; they count toward `multistarts`.
  std::vector<VectorXd> initial_points;
};

struct OptimResult {
  VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Objective returns f(x) and writes the gradient; +inf marks an infeasible point.
using Objective = std::function<double(const VectorXd&, VectorXd&)>;

namespace detail {

inline VectorXd clamp_box(const VectorXd& x, const Bounds& b) {
  return x.cwiseMax(b.lower).cwiseMin(b.upper);
}

inline VectorXd projected_gradient(const VectorXd& x, const VectorXd& g, const Bounds& b) {
  VectorXd pg = g;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) <= b.lower(i) && g(i) > 0.0) pg(i) = 0.0;
    if (x(i) >= b.upper(i) && g(i) < 0.0) pg(i) = 0.0;
  }
  return pg;
}

}  // namespace detail

// Projected BFGS with Armijo backtracking on a box.
inline OptimResult minimize_box(const Objective& fg, const VectorXd& x0, const Bounds& box,
                                int max_iter, double gtol) {
  const Eigen::Index n = x0.size();
  OptimResult res;
  VectorXd x = detail::clamp_box(x0, box);
  VectorXd g(n);
  double f = fg(x, g);
  res.x = x;
  res.value = f;
  if (!std::isfinite(f)) return res;

  MatrixXd H = MatrixXd::Identity(n, n);
  bool fresh = true;
  int stall = 0;
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    const VectorXd pg = detail::projected_gradient(x, g, box);
    if (pg.lpNorm<Eigen::Infinity>() < gtol) {
      res.converged = true;
      break;
    }
    VectorXd dir = -(H * g);
    for (Eigen::Index i = 0; i < n; ++i)
      if (pg(i) == 0.0) dir(i) = 0.0;
    if (g.dot(dir) >= 0.0) {
      H.setIdentity();
      fresh = true;
      dir = -pg;
    }
    // Cap the first step of a fresh curvature model at unit length.
    if (fresh) {
      const double norm = dir.norm();
      if (norm > 1.0) dir /= norm;
    }

    double step = 1.0;
    VectorXd xn, gn(n);
    double fn = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      xn = detail::clamp_box(x + step * dir, box);
      fn = fg(xn, gn);
      if (std::isfinite(fn) && fn <= f + 1e-4 * g.dot(xn - x)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (fresh) break;
      H.setIdentity();
      fresh = true;
      continue;
    }

    const VectorXd s = xn - x;
    const VectorXd yv = gn - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (fresh) H *= sy / yv.squaredNorm();
      const double rho = 1.0 / sy;
      const MatrixXd I = MatrixXd::Identity(n, n);
      H = (I - rho * s * yv.transpose()) * H * (I - rho * yv * s.transpose()) +
          rho * s * s.transpose();
      fresh = false;
    }
    const double decrease = f - fn;
    x = xn;
    g = gn;
    f = fn;
    if (decrease <= 1e-12 * (1.0 + std::abs(f))) {
      if (++stall >= 3) {
        res.converged = true;
        break;
      }
    } else {
      stall = 0;
    }
  }
  res.x = x;
  res.value = f;
  return res;
}

// Start points: warm starts, then the box midpoint, then a seeded Latin hypercube.
inline std::vector<VectorXd> multistart_points(const Bounds& box, const OptimizerConfig& cfg) {
  std::vector<VectorXd> pts = cfg.initial_points;
  const auto total = static_cast<std::size_t>(std::max(cfg.multistarts, 1));
  if (pts.size() < total) pts.push_back(0.5 * (box.lower + box.upper));
  if (pts.size() < total) {
    const int extra = static_cast<int>(total - pts.size());
    Rng rng(derive_seed(cfg.seed, 0x5eed));
    const MatrixXd U = latin_hypercube(extra, static_cast<int>(box.lower.size()), rng);
    for (int i = 0; i < extra; ++i) {
      VectorXd p = box.lower.array() + U.row(i).transpose().array() *
                                           (box.upper - box.lower).array();
      pts.push_back(std::move(p));
    }
  }
  return pts;
}

struct MultistartResult {
  OptimResult best;
  std::vector<double> start_values;  // objective at each start point
  int best_index = -1;
};

inline MultistartResult minimize_multistart(const Objective& fg, const Bounds& box,
                                            const OptimizerConfig& cfg) {
  MultistartResult out;
  const auto pts = multistart_points(box, cfg);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    VectorXd g(pts[i].size());
    out.start_values.push_back(fg(detail::clamp_box(pts[i], box), g));
    OptimResult r = minimize_box(fg, pts[i], box, cfg.max_iterations, cfg.gradient_tolerance);
    if (r.value < out.best.value) {
      out.best = std::move(r);
      out.best_index = static_cast<int>(i);
    }
  }
  if (out.best_index < 0) throw NotPositiveDefinite("optimizer: every start point is infeasible");
  return out;
}

}  // namespace dnamf
