#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "dnamf/dataset.hpp"
#include "dnamf/errors.hpp"
#include "dnamf/gp_level1.hpp"
#include "dnamf/kernels.hpp"
#include "dnamf/linalg.hpp"
#include "dnamf/optimizer.hpp"
#include "dnamf/random.hpp"

namespace dnamf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DnaModel {
  KernelKind kind = KernelKind::SqExp;
  MultiFidelityData data;
  Level1Model level1;
  double alpha = 0.0;
  double tau2 = 0.0;
  NonsepHyper hyper;
  TrainingAssembly assembly;
  SpdFactor factor;
  MatrixXd k_inv;        // (K + jitter)^{-1}
  VectorXd weights;      // r = K^{-1}(Y_{-1} - alpha 1)
  double objective = 0.0;  // profile_neg_loglik at hyper

  int num_levels() const { return data.num_levels(); }
  Eigen::Index dim() const { return data.dim(); }
};

struct LikelihoodValue {
  double value = 0.0;
  VectorXd gradient;  // w.r.t. theta_x..., theta_y, theta_t, beta, delta (raw scale)
};

inline MeanScale mle_mean_scale(const TrainingAssembly& a, const SpdFactor& F) {
  return mle_mean_scale(a.y_out, F);
}

// 0.5 log det K + (N/2) log Q with Q = (Y - a 1)^T K^{-1} (Y - a 1) at the GLS mean a.
// This is the negative profile log-likelihood up to an additive constant.
inline LikelihoodValue profile_neg_loglik(const NonsepHyper& h, const TrainingAssembly& a,
                                          KernelKind kind, bool with_gradient = true) {
  LikelihoodValue out;
  const int d = static_cast<int>(a.inputs.dim());
  std::vector<MatrixXd> dK;
  const MatrixXd K = with_gradient ? gram_with_grads(a.inputs, h, kind, dK)
                                   : gram(a.inputs, h, kind);
  SpdFactor F;
  try {
    F = cholesky(K);
  } catch (const NotPositiveDefinite&) {
    out.value = std::numeric_limits<double>::infinity();
    out.gradient = VectorXd::Zero(num_hyper(d));
    return out;
  }
  const auto n = static_cast<double>(a.size());
  const MeanScale ms = mle_mean_scale(a.y_out, F);
  const double Q = ms.tau2 * n;
  if (!(Q > 0.0)) throw DegenerateData("outputs of levels 2..L are constant");
  out.value = 0.5 * log_det(F) + 0.5 * n * std::log(Q);
  if (with_gradient) {
    const VectorXd r = solve(F, VectorXd(a.y_out.array() - ms.alpha));
    const MatrixXd Kinv = inverse(F);
    out.gradient.resize(num_hyper(d));
    for (int m = 0; m < num_hyper(d); ++m) {
      const auto& G = dK[static_cast<std::size_t>(m)];
      const double tr = (Kinv.array() * G.array()).sum();
      const double quad = r.dot(G * r);
      out.gradient(m) = 0.5 * tr - 0.5 * n * quad / Q;
    }
  }
  return out;
}

// ---------------------------------------------------- working parameterization

// [log theta_x, log theta_y, log theta_t, beta, delta]
inline VectorXd to_working(const NonsepHyper& h) {
  const auto d = h.theta_x.size();
  VectorXd w(d + 4);
  w.head(d) = h.theta_x.array().log();
  w(d) = std::log(h.theta_y);
  w(d + 1) = std::log(h.theta_t);
  w(d + 2) = h.beta;
  w(d + 3) = h.delta;
  return w;
}

inline NonsepHyper from_working(const VectorXd& w) {
  const auto d = w.size() - 4;
  NonsepHyper h;
  h.theta_x = w.head(d).array().exp();
  h.theta_y = std::exp(w(d));
  h.theta_t = std::exp(w(d + 1));
  h.beta = w(d + 2);
  h.delta = w(d + 3);
  return h;
}

inline Bounds dna_bounds(const TrainingAssembly& a, KernelKind kind) {
  const auto d = a.inputs.dim();
  Bounds b{VectorXd(d + 4), VectorXd(d + 4)};
  // SqExp lengthscales are squared distances, Matern ones are linear. theta_t always
  // divides a squared difference.
  const bool sq_kind = kind == KernelKind::SqExp;
  auto set = [&](Eigen::Index i, double s, bool sq) {
    if (!(s > 0.0) || !std::isfinite(s)) s = 1.0;
    b.lower(i) = sq ? std::log(1e-2 * s * s) : std::log(0.1 * s);
    b.upper(i) = sq ? std::log(1e2 * s * s) : std::log(10.0 * s);
  };
  for (Eigen::Index j = 0; j < d; ++j)
    set(j, a.inputs.X.col(j).maxCoeff() - a.inputs.X.col(j).minCoeff(), sq_kind);
  set(d, a.inputs.y.maxCoeff() - a.inputs.y.minCoeff(), sq_kind);
  double st = a.inputs.t.maxCoeff() - a.inputs.t.minCoeff();
  if (!(st > 0.0)) st = a.inputs.t.maxCoeff();
  set(d + 1, st, true);
  b.lower(d + 2) = 0.0;
  b.upper(d + 2) = 1.0;
  b.lower(d + 3) = 0.5;
  b.upper(d + 3) = 5.0;
  return b;
}

inline double working_objective(const TrainingAssembly& a, KernelKind kind, const VectorXd& w,
                                VectorXd& grad) {
  const NonsepHyper h = from_working(w);
  const auto lv = profile_neg_loglik(h, a, kind);
  const auto d = h.theta_x.size();
  grad = lv.gradient;
  for (Eigen::Index j = 0; j < d; ++j) grad(j) *= h.theta_x(j);
  grad(d) *= h.theta_y;
  grad(d + 1) *= h.theta_t;
  return lv.value;
}

// ------------------------------------------------------------ model assembly

// Model at given hyperparameters, mean and scale.
inline DnaModel make_dna_model(const MultiFidelityData& data, KernelKind kind, Level1Model level1,
                               const NonsepHyper& h, double alpha, double tau2) {
  DnaModel m;
  m.kind = kind;
  m.data = data;
  m.level1 = std::move(level1);
  m.hyper = h;
  m.assembly = assemble(data);
  m.factor = cholesky(gram(m.assembly.inputs, h, kind));
  m.k_inv = inverse(m.factor);
  m.alpha = alpha;
  m.tau2 = tau2;
  m.weights = solve(m.factor, VectorXd(m.assembly.y_out.array() - alpha));
  // Undefined for constant outputs (e.g. a single level-2 point).
  const auto& yo = m.assembly.y_out;
  if (!(yo.array() == yo(0)).all()) m.objective = profile_neg_loglik(h, m.assembly, kind, false).value;
  return m;
}

// Model at given hyperparameters with the profile MLE of mean and scale.
inline DnaModel make_dna_model(const MultiFidelityData& data, KernelKind kind, Level1Model level1,
                               const NonsepHyper& h) {
  const auto a = assemble(data);
  const MeanScale ms = mle_mean_scale(a, cholesky(gram(a.inputs, h, kind)));
  return make_dna_model(data, kind, std::move(level1), h, ms.alpha, ms.tau2);
}

struct DnaFitDiagnostics {
  std::vector<double> start_values;
  int best_start = -1;
};

inline NonsepHyper fit_nonsep_hyper(const TrainingAssembly& a, KernelKind kind,
                                    const OptimizerConfig& opt, std::uint64_t seed,
                                    DnaFitDiagnostics* diag = nullptr) {
  const Bounds box = opt.bounds ? *opt.bounds : dna_bounds(a, kind);
  OptimizerConfig cfg = opt;
  cfg.seed = seed;
  Objective fg = [&](const VectorXd& w, VectorXd& g) { return working_objective(a, kind, w, g); };
  const auto res = minimize_multistart(fg, box, cfg);
  if (diag) {
    diag->start_values = res.start_values;
    diag->best_start = res.best_index;
  }
  return from_working(res.best.x);
}

// Level-1 GP and augmented GP by maximum likelihood. `opt.initial_points` and
// `opt.bounds` apply to the augmented part only.
inline DnaModel fit(const MultiFidelityData& data, KernelKind kind, const OptimizerConfig& opt,
                    std::uint64_t seed, DnaFitDiagnostics* diag = nullptr) {
  const auto a = assemble(data);
  if ((a.y_out.array() == a.y_out(0)).all())
    throw DegenerateData("outputs of levels 2..L are constant");
  OptimizerConfig l1opt = opt;
  l1opt.bounds.reset();
  l1opt.initial_points.clear();
  Level1Model l1 = fit_level1(data.level(0).X, data.level(0).y, l1opt, derive_seed(seed, 1));
  const NonsepHyper h = fit_nonsep_hyper(a, kind, opt, derive_seed(seed, 2), diag);
  return make_dna_model(data, kind, std::move(l1), h);
}

}  // namespace dnamf
