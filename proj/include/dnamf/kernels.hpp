#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dnamf/errors.hpp"

namespace dnamf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class KernelKind { SqExp, Matern15, Matern25 };

inline std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::SqExp: return "sqexp";
    case KernelKind::Matern15: return "matern15";
    case KernelKind::Matern25: return "matern25";
  }
  return "unknown";
}

inline KernelKind parse_kernel_kind(std::string_view s) {
  if (s == "sqexp") return KernelKind::SqExp;
  if (s == "matern15") return KernelKind::Matern15;
  if (s == "matern25") return KernelKind::Matern25;
  throw ConfigError("unknown kernel '" + std::string(s) + "' (expected sqexp, matern15 or matern25)");
}

inline double matern_nu(KernelKind k) {
  return k == KernelKind::Matern15 ? 1.5 : 2.5;
}

// sqrt(2 nu): sqrt(3) for nu = 1.5, sqrt(5) for nu = 2.5.
inline double matern_scale(KernelKind k) { return std::sqrt(2.0 * matern_nu(k)); }

struct Level1Hyper {
  VectorXd theta;  // squared-input units
};

struct NonsepHyper {
  // SqExp: squared lengthscales. Matern: linear lengthscales.
  VectorXd theta_x;
  double theta_y = 1.0;
  double theta_t = 1.0;
  double beta = 0.5;
  double delta = 0.5;
};

inline bool is_valid(const NonsepHyper& h, double min_delta = 0.5) {
  auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
  for (Eigen::Index j = 0; j < h.theta_x.size(); ++j)
    if (!pos(h.theta_x(j))) return false;
  return pos(h.theta_y) && pos(h.theta_t) && h.beta >= 0.0 && h.beta <= 1.0 &&
         std::isfinite(h.delta) && h.delta >= min_delta;
}

struct AugmentedPoint {
  double t = 0.0;
  VectorXd x;
  double y = 0.0;
};

// Column storage of augmented inputs (t, x, y), one row per point.
struct AugmentedInputs {
  VectorXd t;
  MatrixXd X;
  VectorXd y;

  Eigen::Index size() const { return t.size(); }
  Eigen::Index dim() const { return X.cols(); }

  static AugmentedInputs from_points(const std::vector<AugmentedPoint>& pts) {
    AugmentedInputs a;
    const auto n = static_cast<Eigen::Index>(pts.size());
    const Eigen::Index d = n > 0 ? pts.front().x.size() : 0;
    a.t.resize(n);
    a.X.resize(n, d);
    a.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& p = pts[static_cast<std::size_t>(i)];
      if (p.x.size() != d) throw std::invalid_argument("augmented points have mixed dimensions");
      a.t(i) = p.t;
      a.X.row(i) = p.x.transpose();
      a.y(i) = p.y;
    }
    return a;
  }
};

// ---------------------------------------------------------------- level 1

inline double k1(const VectorXd& x, const VectorXd& xp, const Level1Hyper& h) {
  if (x.size() != xp.size() || x.size() != h.theta.size())
    throw std::invalid_argument("k1: dimension mismatch");
  double s = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double d = x(j) - xp(j);
    s += d * d / h.theta(j);
  }
  return std::exp(-s);
}

inline MatrixXd gram_level1(const MatrixXd& X, const Level1Hyper& h) {
  const Eigen::Index n = X.rows();
  MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Eigen::Index k = 0; k < i; ++k) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double d = X(i, j) - X(k, j);
        s += d * d / h.theta(j);
      }
      K(i, k) = K(k, i) = std::exp(-s);
    }
  }
  return K;
}

// dK/dtheta_j for every j.
inline std::vector<MatrixXd> gram_level1_grads(const MatrixXd& X, const Level1Hyper& h,
                                               const MatrixXd& K) {
  const Eigen::Index n = X.rows(), d = X.cols();
  std::vector<MatrixXd> g(static_cast<std::size_t>(d), MatrixXd::Zero(n, n));
  for (Eigen::Index j = 0; j < d; ++j) {
    auto& G = g[static_cast<std::size_t>(j)];
    const double th2 = h.theta(j) * h.theta(j);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < i; ++k) {
        const double dx = X(i, j) - X(k, j);
        G(i, k) = G(k, i) = K(i, k) * dx * dx / th2;
      }
  }
  return g;
}

// ---------------------------------------------------------- augmented kernel

// Hyperparameter order used for gradients: theta_x[0..d), theta_y, theta_t, beta, delta.
struct HyperIndex {
  enum class Kind { ThetaX, ThetaY, ThetaT, Beta, Delta };
  Kind kind = Kind::ThetaX;
  int j = 0;

  int flat(int d) const {
    switch (kind) {
      case Kind::ThetaX: return j;
      case Kind::ThetaY: return d;
      case Kind::ThetaT: return d + 1;
      case Kind::Beta: return d + 2;
      case Kind::Delta: return d + 3;
    }
    return -1;
  }
};

inline int num_hyper(int d) { return d + 4; }

namespace detail {

// psi(a) = p(a) exp(-a); g(a) = a psi'(a) / psi(a).
inline double matern_psi(double nu, double a) {
  if (nu == 1.5) return (1.0 + a) * std::exp(-a);
  return (1.0 + a + a * a / 3.0) * std::exp(-a);
}

inline double matern_g(double nu, double a) {
  if (nu == 1.5) return -a * a / (1.0 + a);
  return -a * a * (1.0 + a) / (3.0 * (1.0 + a + a * a / 3.0));
}

// Kernel value; if grad != nullptr also writes d+4 partial derivatives.
template <class XA, class XB>
double nonsep_eval(double t, const XA& x, double y, double tp, const XB& xp, double yp, int d,
                   const NonsepHyper& h, KernelKind kind, double* grad) {
  const double dt = t - tp;
  const double q = dt * dt / h.theta_t;
  const double lu = -std::log1p(q);  // log u
  const double u = std::exp(lu);
  const double p = h.beta * (d + 1) / 2.0 + h.delta;
  const double upow = std::exp(p * lu);

  if (kind == KernelKind::SqExp) {
    const double ub = std::exp(h.beta * lu);
    double v = 0.0;
    for (int j = 0; j < d; ++j) {
      const double dx = x(j) - xp(j);
      v += dx * dx / h.theta_x(j);
    }
    const double dy = y - yp;
    v += dy * dy / h.theta_y;
    const double k = upow * std::exp(-ub * v);
    if (grad) {
      for (int j = 0; j < d; ++j) {
        const double dx = x(j) - xp(j);
        grad[j] = k * ub * dx * dx / (h.theta_x(j) * h.theta_x(j));
      }
      grad[d] = k * ub * dy * dy / (h.theta_y * h.theta_y);
      grad[d + 1] = k * (p * u - h.beta * ub * u * v) * dt * dt / (h.theta_t * h.theta_t);
      grad[d + 2] = k * lu * ((d + 1) / 2.0 - ub * v);
      grad[d + 3] = k * lu;
    }
    return k;
  }

  const double nu = matern_nu(kind);
  const double sn = matern_scale(kind);
  const double uh = std::exp(0.5 * h.beta * lu);  // u^{beta/2}
  double k = upow;
  double gsum = 0.0;
  for (int m = 0; m <= d; ++m) {
    const double diff = m < d ? x(m) - xp(m) : y - yp;
    const double th = m < d ? h.theta_x(m) : h.theta_y;
    const double a = uh * sn * std::abs(diff) / th;
    k *= matern_psi(nu, a);
    const double g = matern_g(nu, a);
    gsum += g;
    if (grad) grad[m] = -g / th;  // scaled by k below
  }
  if (grad) {
    for (int m = 0; m <= d; ++m) grad[m] *= k;
    grad[d + 1] = k * (p + 0.5 * h.beta * gsum) * u * dt * dt / (h.theta_t * h.theta_t);
    grad[d + 2] = k * lu * ((d + 1) / 2.0 + 0.5 * gsum);
    grad[d + 3] = k * lu;
  }
  return k;
}

}  // namespace detail

inline double k_nonsep(const AugmentedPoint& p, const AugmentedPoint& pp, const NonsepHyper& h,
                       KernelKind kind) {
  const auto d = static_cast<int>(p.x.size());
  if (pp.x.size() != d || h.theta_x.size() != d)
    throw std::invalid_argument("k_nonsep: dimension mismatch");
  return detail::nonsep_eval(p.t, p.x, p.y, pp.t, pp.x, pp.y, d, h, kind, nullptr);
}

namespace detail {

inline double nonsep_row(const AugmentedInputs& a, Eigen::Index i, Eigen::Index k,
                         const NonsepHyper& h, KernelKind kind, double* grad) {
  return nonsep_eval(a.t(i), a.X.row(i), a.y(i), a.t(k), a.X.row(k), a.y(k),
                     static_cast<int>(a.dim()), h, kind, grad);
}

}  // namespace detail

inline MatrixXd gram(const AugmentedInputs& a, const NonsepHyper& h, KernelKind kind) {
  if (h.theta_x.size() != a.dim()) throw std::invalid_argument("gram: dimension mismatch");
  const Eigen::Index n = a.size();
  MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Eigen::Index k = 0; k < i; ++k)
      K(i, k) = K(k, i) = detail::nonsep_row(a, i, k, h, kind, nullptr);
  }
  return K;
}

inline MatrixXd gram(const std::vector<AugmentedPoint>& pts, const NonsepHyper& h,
                     KernelKind kind) {
  if (pts.empty()) throw std::invalid_argument("gram: empty point list");
  return gram(AugmentedInputs::from_points(pts), h, kind);
}

// Gram matrix together with all d+4 partial-derivative matrices.
inline MatrixXd gram_with_grads(const AugmentedInputs& a, const NonsepHyper& h, KernelKind kind,
                                std::vector<MatrixXd>& grads) {
  if (h.theta_x.size() != a.dim()) throw std::invalid_argument("gram: dimension mismatch");
  const Eigen::Index n = a.size();
  const int d = static_cast<int>(a.dim());
  const int np = num_hyper(d);
  grads.assign(static_cast<std::size_t>(np), MatrixXd::Zero(n, n));
  MatrixXd K(n, n);
  std::vector<double> g(static_cast<std::size_t>(np));
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Eigen::Index k = 0; k < i; ++k) {
      K(i, k) = K(k, i) = detail::nonsep_row(a, i, k, h, kind, g.data());
      for (int m = 0; m < np; ++m) {
        auto& G = grads[static_cast<std::size_t>(m)];
        G(i, k) = G(k, i) = g[static_cast<std::size_t>(m)];
      }
    }
  }
  return K;
}

inline MatrixXd gram_grad(const AugmentedInputs& a, const NonsepHyper& h, KernelKind kind,
                          HyperIndex param) {
  std::vector<MatrixXd> grads;
  gram_with_grads(a, h, kind, grads);
  return grads[static_cast<std::size_t>(param.flat(static_cast<int>(a.dim())))];
}

inline MatrixXd gram_grad(const std::vector<AugmentedPoint>& pts, const NonsepHyper& h,
                          KernelKind kind, HyperIndex param) {
  return gram_grad(AugmentedInputs::from_points(pts), h, kind, param);
}

// Cross-covariance between query rows b and training rows a.
inline MatrixXd cross_gram(const AugmentedInputs& b, const AugmentedInputs& a,
                           const NonsepHyper& h, KernelKind kind) {
  const int d = static_cast<int>(a.dim());
  MatrixXd K(b.size(), a.size());
  for (Eigen::Index i = 0; i < b.size(); ++i)
    for (Eigen::Index k = 0; k < a.size(); ++k)
      K(i, k) = detail::nonsep_eval(b.t(i), b.X.row(i), b.y(i), a.t(k), a.X.row(k), a.y(k), d,
                                    h, kind, nullptr);
  return K;
}

// Split of k((t,x,y), training point i) into a y-free weight w_i and a y-factor.
// SqExp:  k_i(y) = w_i * exp(-c_i (y - Y_i)^2 / theta_y),  c_i = u_i^beta
// Matern: k_i(y) = w_i * psi(c_i |y - Y_i|),                c_i = sqrt(2 nu) u_i^{beta/2} / theta_y
struct QueryFactors {
  VectorXd w;
  VectorXd c;
};

inline QueryFactors query_factors(const AugmentedInputs& train, const NonsepHyper& h,
                                  KernelKind kind, double t, const VectorXd& x) {
  const Eigen::Index n = train.size();
  const int d = static_cast<int>(train.dim());
  if (x.size() != d) throw std::invalid_argument("query_factors: dimension mismatch");
  QueryFactors f;
  f.w.resize(n);
  f.c.resize(n);
  const double p = h.beta * (d + 1) / 2.0 + h.delta;
  const bool sq = kind == KernelKind::SqExp;
  const double nu = sq ? 0.0 : matern_nu(kind);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dt = t - train.t(i);
    const double lu = -std::log1p(dt * dt / h.theta_t);
    double w = std::exp(p * lu);
    if (sq) {
      const double ub = std::exp(h.beta * lu);
      double v = 0.0;
      for (int j = 0; j < d; ++j) {
        const double dx = x(j) - train.X(i, j);
        v += dx * dx / h.theta_x(j);
      }
      w *= std::exp(-ub * v);
      f.c(i) = ub;
    } else {
      const double uh = std::exp(0.5 * h.beta * lu) * matern_scale(kind);
      for (int j = 0; j < d; ++j)
        w *= detail::matern_psi(nu, uh * std::abs(x(j) - train.X(i, j)) / h.theta_x(j));
      f.c(i) = uh / h.theta_y;
    }
    f.w(i) = w;
  }
  return f;
}

inline double y_factor(KernelKind kind, const NonsepHyper& h, double c, double dy) {
  if (kind == KernelKind::SqExp) return std::exp(-c * dy * dy / h.theta_y);
  return detail::matern_psi(matern_nu(kind), c * std::abs(dy));
}

}  // namespace dnamf
