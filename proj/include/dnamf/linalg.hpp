#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <utility>

#include "dnamf/errors.hpp"

namespace dnamf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kDefaultJitter = 1e-8;

class SpdFactor {
 public:
  SpdFactor() = default;

  const MatrixXd& lower() const { return lower_; }
  Eigen::Index dim() const { return lower_.rows(); }
  // Absolute amount added to the diagonal before factorizing.
  double jitter_added() const { return jitter_added_; }

 private:
  friend SpdFactor cholesky(const MatrixXd& a, double jitter);
  MatrixXd lower_;
  double jitter_added_ = 0.0;
};

namespace detail {

inline void require_symmetric(const MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("cholesky: matrix is not square");
  const double scale = a.cwiseAbs().maxCoeff();
  if (!std::isfinite(scale)) throw NotPositiveDefinite("cholesky: non-finite entries");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("cholesky: matrix is not symmetric");
}

inline bool try_llt(const MatrixXd& a, double shift, MatrixXd& out) {
  MatrixXd b = a;
  b.diagonal().array() += shift;
  Eigen::LLT<MatrixXd> llt(b);
  if (llt.info() != Eigen::Success) return false;
  out = llt.matrixL();
  // Eigen accepts tiny positive pivots; also reject non-finite output.
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    if (!(out(i, i) > 0.0) || !std::isfinite(out(i, i))) return false;
  return true;
}

}  // namespace detail

// Factor of A + jitter * mean(diag(A)) * I. On failure retries once with 100x jitter.
inline SpdFactor cholesky(const MatrixXd& a, double jitter = kDefaultJitter) {
  if (jitter < 0.0) throw std::invalid_argument("cholesky: negative jitter");
  detail::require_symmetric(a);
  SpdFactor f;
  if (a.rows() == 0) return f;
  const double mean_diag = a.diagonal().mean();
  if (!(mean_diag > 0.0)) throw NotPositiveDefinite("cholesky: non-positive mean diagonal");
  double shift = jitter * mean_diag;
  if (detail::try_llt(a, shift, f.lower_)) {
    f.jitter_added_ = shift;
    return f;
  }
  if (jitter > 0.0) {
    shift *= 100.0;
    if (detail::try_llt(a, shift, f.lower_)) {
      f.jitter_added_ = shift;
      return f;
    }
  }
  throw NotPositiveDefinite("cholesky: matrix is not positive definite");
}

inline VectorXd solve(const SpdFactor& f, const VectorXd& b) {
  if (b.size() != f.dim()) throw std::invalid_argument("solve: dimension mismatch");
  VectorXd z = f.lower().triangularView<Eigen::Lower>().solve(b);
  return f.lower().transpose().triangularView<Eigen::Upper>().solve(z);
}

inline MatrixXd solve(const SpdFactor& f, const MatrixXd& b) {
  if (b.rows() != f.dim()) throw std::invalid_argument("solve: dimension mismatch");
  MatrixXd z = f.lower().triangularView<Eigen::Lower>().solve(b);
  return f.lower().transpose().triangularView<Eigen::Upper>().solve(z);
}

// L^{-1} b, used for quadratic forms b^T A^{-1} b = |L^{-1} b|^2.
inline VectorXd solve_lower(const SpdFactor& f, const VectorXd& b) {
  if (b.size() != f.dim()) throw std::invalid_argument("solve_lower: dimension mismatch");
  return f.lower().triangularView<Eigen::Lower>().solve(b);
}

inline MatrixXd inverse(const SpdFactor& f) {
  return solve(f, MatrixXd::Identity(f.dim(), f.dim()).eval());
}

inline double log_det(const SpdFactor& f) {
  return 2.0 * f.lower().diagonal().array().log().sum();
}

inline std::pair<double, double> extreme_eigenvalues(const MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw std::invalid_argument("extreme_eigenvalues: expected a nonempty square matrix");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const VectorXd& ev = es.eigenvalues();  // ascending
  return {ev(0), ev(ev.size() - 1)};
}

}  // namespace dnamf
