#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dnamf/dataset.hpp"
#include "dnamf/diagnostics.hpp"
#include "dnamf/dna_fit.hpp"
#include "dnamf/dna_predict.hpp"
#include "dnamf/gp_level1.hpp"
#include "dnamf/random.hpp"

namespace dnamf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Completed design for one level: rows of X*_l, with the source row in the observed
// level (or -1 for a pseudo input).
struct PseudoLevel {
  double t = 0.0;
  MatrixXd X;
  std::vector<int> source;

  int num_pseudo() const {
    return static_cast<int>(std::count(source.begin(), source.end(), -1));
  }
};

using PseudoDesign = std::vector<PseudoLevel>;

inline int total_pseudo(const PseudoDesign& pd) {
  int n = 0;
  for (const auto& l : pd) n += l.num_pseudo();
  return n;
}

// X*_L = X_L and X*_l = X*_{l+1} followed by the rows of X_l not already present.
inline PseudoDesign build_pseudo_design(const MultiFidelityData& data, double tol = kNestedTol) {
  const int L = data.num_levels();
  const bool nested = check_nested(data, tol);
  PseudoDesign pd(static_cast<std::size_t>(L));
  {
    auto& last = pd.back();
    last.t = data.level(L - 1).t;
    last.X = data.level(L - 1).X;
    for (int i = 0; i < last.X.rows(); ++i) last.source.push_back(i);
  }
  for (int l = L - 2; l >= 0; --l) {
    const auto& lv = data.level(l);
    const auto& above = pd[static_cast<std::size_t>(l + 1)];
    auto& cur = pd[static_cast<std::size_t>(l)];
    cur.t = lv.t;
    std::vector<bool> used(static_cast<std::size_t>(lv.size()), false);
    std::vector<Eigen::RowVectorXd> rows;
    int overlaps = 0;
    for (Eigen::Index r = 0; r < above.X.rows(); ++r) {
      int src = -1;
      for (Eigen::Index i = 0; i < lv.size(); ++i)
        if (!used[static_cast<std::size_t>(i)] && detail::rows_equal(above.X, r, lv.X, i, tol)) {
          src = static_cast<int>(i);
          used[static_cast<std::size_t>(i)] = true;
          ++overlaps;
          break;
        }
      rows.push_back(above.X.row(r));
      cur.source.push_back(src);
    }
    for (Eigen::Index i = 0; i < lv.size(); ++i)
      if (!used[static_cast<std::size_t>(i)]) {
        rows.push_back(lv.X.row(i));
        cur.source.push_back(static_cast<int>(i));
      }
    if (overlaps > 0 && !nested)
      warn("level " + std::to_string(l + 1) + " shares " + std::to_string(overlaps) +
           " design point(s) with the completed design above; using the observed outputs");
    cur.X.resize(static_cast<Eigen::Index>(rows.size()), data.dim());
    for (std::size_t r = 0; r < rows.size(); ++r) cur.X.row(static_cast<Eigen::Index>(r)) = rows[r];
  }
  return pd;
}

// -------------------------------------------------------------- parameter set

struct SemParams {
  Level1Hyper level1_hyper;
  double alpha1 = 0.0;
  double tau2_1 = 0.0;
  NonsepHyper hyper;
  double alpha = 0.0;
  double tau2 = 0.0;
};

inline SemParams params_of(const DnaModel& m) {
  return {m.level1.hyper, m.level1.alpha, m.level1.tau2, m.hyper, m.alpha, m.tau2};
}

// Averaging coordinates: logs for lengthscales and scales, raw for means, beta, delta.
inline VectorXd sem_coords(const SemParams& p) {
  const auto d1 = p.level1_hyper.theta.size();
  const VectorXd w = to_working(p.hyper);
  VectorXd v(d1 + 2 + w.size() + 2);
  v.head(d1) = p.level1_hyper.theta.array().log();
  v(d1) = p.alpha1;
  v(d1 + 1) = std::log(p.tau2_1);
  v.segment(d1 + 2, w.size()) = w;
  v(d1 + 2 + w.size()) = p.alpha;
  v(d1 + 3 + w.size()) = std::log(p.tau2);
  return v;
}

inline SemParams from_sem_coords(const VectorXd& v, Eigen::Index d) {
  SemParams p;
  p.level1_hyper.theta = v.head(d).array().exp();
  p.alpha1 = v(d);
  p.tau2_1 = std::exp(v(d + 1));
  p.hyper = from_working(v.segment(d + 2, d + 4));
  p.alpha = v(2 * d + 6);
  p.tau2 = std::exp(v(2 * d + 7));
  return p;
}

inline SemParams average_params(const std::vector<SemParams>& ps) {
  if (ps.empty()) throw std::invalid_argument("average_params: empty chain");
  const VectorXd first = sem_coords(ps.front());
  bool same = true;
  for (const auto& p : ps) same = same && (sem_coords(p).array() == first.array()).all();
  if (same) return ps.front();
  VectorXd acc = VectorXd::Zero(first.size());
  for (const auto& p : ps) acc += sem_coords(p);
  acc /= static_cast<double>(ps.size());
  return from_sem_coords(acc, ps.front().level1_hyper.theta.size());
}

// ------------------------------------------------------------------- the state

struct SemState {
  MultiFidelityData observed;
  PseudoDesign design;
  std::vector<VectorXd> y;          // current y*_l per level
  std::vector<SemParams> chain;     // phi^(0..M)
  std::vector<double> objective;    // profile objective of each chain entry
  int iterations = 0;               // M
  int burn_in = 0;                  // B

  bool trivial() const { return total_pseudo(design) == 0; }
};

inline int burn_in_for(int M) { return static_cast<int>(std::ceil(0.75 * M)); }

// Pseudo-complete nested dataset for outputs y.
inline MultiFidelityData completed_data(const SemState& s, const std::vector<VectorXd>& y) {
  std::vector<FidelityLevel> lv;
  for (std::size_t l = 0; l < s.design.size(); ++l)
    lv.push_back({s.design[l].t, s.design[l].X, y[l]});
  return MultiFidelityData(std::move(lv));
}

inline MultiFidelityData completed_data(const SemState& s) { return completed_data(s, s.y); }

inline DnaModel model_from_params(const MultiFidelityData& complete, KernelKind kind,
                                  const SemParams& p) {
  Level1Model l1 = make_level1(complete.level(0).X, complete.level(0).y, p.level1_hyper,
                               p.alpha1, p.tau2_1);
  return make_dna_model(complete, kind, std::move(l1), p.hyper, p.alpha, p.tau2);
}

namespace detail {

// Draw from N(mean, cov) via a clamped eigendecomposition.
inline VectorXd draw_mvn(const VectorXd& mean, const MatrixXd& cov, Rng& rng) {
  if (mean.size() == 0) return mean;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (cov + cov.transpose()));
  const VectorXd sd = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  NormalSampler normal;
  VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  return mean + es.eigenvectors() * sd.cwiseProduct(z);
}

inline std::vector<int> pseudo_rows(const PseudoLevel& pl) {
  std::vector<int> r;
  for (std::size_t i = 0; i < pl.source.size(); ++i)
    if (pl.source[i] < 0) r.push_back(static_cast<int>(i));
  return r;
}

}  // namespace detail

// Conditional mean and covariance of the pseudo outputs at levels 2..L-1 given the
// observed outputs of levels 2..L, with Y_{-L} taken from the current state.
struct ConditionalNormal {
  std::vector<std::pair<int, int>> targets;  // (level, row)
  VectorXd mean;
  MatrixXd cov;
};

inline ConditionalNormal upper_level_conditional(const SemState& s, const SemParams& p,
                                                 KernelKind kind) {
  const auto data = completed_data(s);
  const auto a = assemble(data);
  std::vector<Eigen::Index> obs, tgt;
  ConditionalNormal cn;
  for (Eigen::Index r = 0, row_in_level = 0; r < a.size(); ++r) {
    const int l = a.level_of_row[static_cast<std::size_t>(r)];
    if (r > 0 && a.level_of_row[static_cast<std::size_t>(r - 1)] != l) row_in_level = 0;
    if (s.design[static_cast<std::size_t>(l)].source[static_cast<std::size_t>(row_in_level)] < 0) {
      tgt.push_back(r);
      cn.targets.emplace_back(l, static_cast<int>(row_in_level));
    } else {
      obs.push_back(r);
    }
    ++row_in_level;
  }
  if (tgt.empty()) return cn;
  const MatrixXd K = gram(a.inputs, p.hyper, kind);
  const auto nt = static_cast<Eigen::Index>(tgt.size());
  const auto no = static_cast<Eigen::Index>(obs.size());
  MatrixXd A(nt, nt), B(nt, no), C(no, no);
  VectorXd yo(no);
  for (Eigen::Index i = 0; i < nt; ++i) {
    for (Eigen::Index k = 0; k < nt; ++k) A(i, k) = K(tgt[i], tgt[k]);
    for (Eigen::Index k = 0; k < no; ++k) B(i, k) = K(tgt[i], obs[k]);
  }
  for (Eigen::Index i = 0; i < no; ++i) {
    yo(i) = a.y_out(obs[i]);
    for (Eigen::Index k = 0; k < no; ++k) C(i, k) = K(obs[i], obs[k]);
  }
  const SpdFactor F = cholesky(C);
  cn.mean = (B * solve(F, VectorXd(yo.array() - p.alpha))).array() + p.alpha;
  const MatrixXd V = F.lower().triangularView<Eigen::Lower>().solve(B.transpose());
  cn.cov = p.tau2 * (A - V.transpose() * V);
  return cn;
}

// One imputation of all pseudo outputs at parameters p.
inline std::vector<VectorXd> e_step(const SemState& s, const SemParams& p, KernelKind kind,
                                    std::uint64_t seed) {
  std::vector<VectorXd> y = s.y;
  if (s.trivial()) return y;
  Rng rng(derive_seed(seed, 0xe5));
  // Level 1: joint GP posterior given the observed level-1 data.
  const auto& top = s.design.front();
  const auto rows1 = detail::pseudo_rows(top);
  if (!rows1.empty()) {
    const auto& obs = s.observed.level(0);
    const Level1Model l1 = make_level1(obs.X, obs.y, p.level1_hyper, p.alpha1, p.tau2_1);
    MatrixXd Xq(static_cast<Eigen::Index>(rows1.size()), top.X.cols());
    for (std::size_t i = 0; i < rows1.size(); ++i) Xq.row(static_cast<Eigen::Index>(i)) = top.X.row(rows1[i]);
    const auto [mean, cov] = posterior_level1_joint(l1, Xq);
    const VectorXd draw = detail::draw_mvn(mean, cov, rng);
    for (std::size_t i = 0; i < rows1.size(); ++i) y[0](rows1[i]) = draw(static_cast<Eigen::Index>(i));
  }
  // Levels 2..L-1 jointly.
  const auto cn = upper_level_conditional(s, p, kind);
  if (!cn.targets.empty()) {
    const VectorXd draw = detail::draw_mvn(cn.mean, cn.cov, rng);
    for (std::size_t i = 0; i < cn.targets.size(); ++i) {
      const auto [l, r] = cn.targets[i];
      y[static_cast<std::size_t>(l)](r) = draw(static_cast<Eigen::Index>(i));
    }
  }
  return y;
}

inline std::pair<SemState, SemParams> sem_init(const MultiFidelityData& data, KernelKind kind,
                                               const OptimizerConfig& opt, std::uint64_t seed) {
  SemState s;
  s.observed = data;
  s.design = build_pseudo_design(data);
  const int L = data.num_levels();
  s.y.resize(static_cast<std::size_t>(L));
  OptimizerConfig l1opt = opt;
  l1opt.bounds.reset();
  l1opt.initial_points.clear();
  for (int l = 0; l < L; ++l) {
    const auto& pl = s.design[static_cast<std::size_t>(l)];
    const auto& lv = data.level(l);
    VectorXd y(pl.X.rows());
    const bool needs_gp = pl.num_pseudo() > 0;
    Level1Model gp;
    if (needs_gp) gp = fit_level1(lv.X, lv.y, l1opt, derive_seed(seed, 0x100 + static_cast<std::uint64_t>(l)));
    for (Eigen::Index i = 0; i < pl.X.rows(); ++i) {
      const int src = pl.source[static_cast<std::size_t>(i)];
      y(i) = src >= 0 ? lv.y(src) : predict_level1(gp, pl.X.row(i).transpose()).mean;
    }
    s.y[static_cast<std::size_t>(l)] = std::move(y);
  }
  const DnaModel m = fit(completed_data(s), kind, opt, seed);
  const SemParams p0 = params_of(m);
  s.chain.push_back(p0);
  s.objective.push_back(m.objective);
  return {std::move(s), p0};
}

inline DnaModel m_step(const SemState& s, const SemParams& prev, KernelKind kind,
                       std::uint64_t seed) {
  const auto data = completed_data(s);
  OptimizerConfig l1opt;
  l1opt.multistarts = 1;
  l1opt.initial_points = {prev.level1_hyper.theta.array().log().matrix()};
  Level1Model l1 = fit_level1(data.level(0).X, data.level(0).y, l1opt, derive_seed(seed, 1));
  OptimizerConfig opt;
  opt.multistarts = 1;
  opt.initial_points = {to_working(prev.hyper)};
  const NonsepHyper h = fit_nonsep_hyper(assemble(data), kind, opt, derive_seed(seed, 2));
  return make_dna_model(data, kind, std::move(l1), h);
}

struct SemFit {
  DnaModel model;
  SemState state;
};

inline SemFit sem_fit(const MultiFidelityData& data, KernelKind kind, int M, std::uint64_t seed,
                      const OptimizerConfig& opt = {}) {
  if (M < 4) throw ConfigError("SEM needs at least 4 iterations");
  const PseudoDesign pd = build_pseudo_design(data);
  if (total_pseudo(pd) == 0) {
    SemFit out{fit(data, kind, opt, seed), SemState{}};
    out.state.observed = data;
    out.state.design = pd;
    for (const auto& lv : data.levels()) out.state.y.push_back(lv.y);
    out.state.chain.assign(static_cast<std::size_t>(M + 1), params_of(out.model));
    out.state.objective.assign(static_cast<std::size_t>(M + 1), out.model.objective);
    out.state.iterations = M;
    out.state.burn_in = burn_in_for(M);
    return out;
  }
  auto [state, params] = sem_init(data, kind, opt, seed);
  state.iterations = M;
  state.burn_in = burn_in_for(M);
  for (int m = 1; m <= M; ++m) {
    const auto s_seed = derive_seed(seed, 0x5e0000 + static_cast<std::uint64_t>(m));
    state.y = e_step(state, params, kind, s_seed);
    const DnaModel fitted = m_step(state, params, kind, s_seed);
    params = params_of(fitted);
    state.chain.push_back(params);
    state.objective.push_back(fitted.objective);
  }
  const std::vector<SemParams> tail(state.chain.begin() + state.burn_in + 1, state.chain.end());
  const SemParams avg = average_params(tail);
  DnaModel model = model_from_params(completed_data(state), kind, avg);
  return {std::move(model), std::move(state)};
}

struct MixtureMoments {
  double mean = 0.0;
  double var = 0.0;
};

inline MixtureMoments mixture_moments(const std::vector<double>& means,
                                      const std::vector<double>& vars) {
  const auto n = static_cast<double>(means.size());
  MixtureMoments mm;
  double second = 0.0;
  for (std::size_t i = 0; i < means.size(); ++i) {
    mm.mean += means[i];
    second += means[i] * means[i] + vars[i];
  }
  mm.mean /= n;
  mm.var = std::max(second / n - mm.mean * mm.mean, 0.0);
  return mm;
}

inline std::vector<Prediction> sem_predict(const DnaModel& model, const SemState& state,
                                           const MatrixXd& X, double t_target, int draws,
                                           std::uint64_t seed) {
  if (state.trivial()) return predict_batch(model, X, t_target);
  if (draws < 1) throw ConfigError("sem_predict needs at least one draw");
  const SemParams p = params_of(model);
  std::vector<std::vector<double>> mu(static_cast<std::size_t>(X.rows())),
      var(static_cast<std::size_t>(X.rows()));
  for (int d = 0; d < draws; ++d) {
    const auto y = e_step(state, p, model.kind, derive_seed(seed, 0xd0000 + static_cast<std::uint64_t>(d)));
    const DnaModel md = model_from_params(completed_data(state, y), model.kind, p);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const Prediction pr = propagate(md, X.row(i).transpose(), t_target);
      mu[static_cast<std::size_t>(i)].push_back(pr.mean);
      var[static_cast<std::size_t>(i)].push_back(pr.var);
    }
  }
  std::vector<Prediction> out;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto mm = mixture_moments(mu[i], var[i]);
    Prediction pr;
    pr.mean = mm.mean;
    pr.var = mm.var;
    pr.t_target = t_target;
    out.push_back(pr);
  }
  return out;
}

}  // namespace dnamf
