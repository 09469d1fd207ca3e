#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace dnamf;
using namespace dnamf::testing;

namespace {

const KernelKind kAllKinds[] = {KernelKind::SqExp, KernelKind::Matern15, KernelKind::Matern25};

AugmentedPoint pt(double t, std::initializer_list<double> x, double y) {
  AugmentedPoint p;
  p.t = t;
  p.x = Eigen::Map<const VectorXd>(x.begin(), static_cast<Eigen::Index>(x.size()));
  p.y = y;
  return p;
}

NonsepHyper with_param(NonsepHyper h, int idx, double v) {
  const int d = static_cast<int>(h.theta_x.size());
  if (idx < d) h.theta_x(idx) = v;
  else if (idx == d) h.theta_y = v;
  else if (idx == d + 1) h.theta_t = v;
  else if (idx == d + 2) h.beta = v;
  else h.delta = v;
  return h;
}

double param(const NonsepHyper& h, int idx) {
  const int d = static_cast<int>(h.theta_x.size());
  if (idx < d) return h.theta_x(idx);
  if (idx == d) return h.theta_y;
  if (idx == d + 1) return h.theta_t;
  if (idx == d + 2) return h.beta;
  return h.delta;
}

}  // namespace

TEST(Level1Kernel, Examples) {
  Level1Hyper h{VectorXd::Ones(1)};
  VectorXd a(1), b(1);
  a << 0.3;
  b << 1.3;
  EXPECT_DOUBLE_EQ(k1(a, a, h), 1.0);
  EXPECT_NEAR(k1(a, b, h), 0.367879441171442, 1e-12);
  Level1Hyper h2{VectorXd(2)};
  h2.theta << 1, 2;
  VectorXd c(2), e(2);
  c << 0, 0;
  e << 1, std::sqrt(2.0);
  EXPECT_NEAR(k1(c, e, h2), 0.135335283236613, 1e-12);
}

TEST(Level1Kernel, GradientsMatchFiniteDifferences) {
  TestRng r(3);
  MatrixXd X(6, 2);
  for (int i = 0; i < 6; ++i) X.row(i) << r.uniform(), r.uniform();
  Level1Hyper h{VectorXd(2)};
  h.theta << 0.3, 1.7;
  const MatrixXd K = gram_level1(X, h);
  const auto G = gram_level1_grads(X, h, K);
  for (int j = 0; j < 2; ++j) {
    const double eps = 1e-6 * h.theta(j);
    Level1Hyper hp = h, hm = h;
    hp.theta(j) += eps;
    hm.theta(j) -= eps;
    const MatrixXd fd = (gram_level1(X, hp) - gram_level1(X, hm)) / (2 * eps);
    EXPECT_LE((fd - G[j]).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(NonsepKernel, IdenticalPointsGiveOne) {
  TestRng r(4);
  for (KernelKind kind : kAllKinds) {
    const auto h = random_hyper(2, kind, r);
    const auto p = random_points(1, 2, r)[0];
    EXPECT_DOUBLE_EQ(k_nonsep(p, p, h, kind), 1.0);
  }
}

TEST(NonsepKernel, TuningDecayExample) {
  NonsepHyper h{VectorXd::Ones(1), 1.0, 1.0, 1.0, 0.5};
  EXPECT_NEAR(k_nonsep(pt(1, {0.4}, 2), pt(0, {0.4}, 2), h, KernelKind::SqExp),
              0.353553390593274, 1e-12);
}

TEST(NonsepKernel, MatchesReferenceFormula) {
  TestRng r(5);
  for (KernelKind kind : kAllKinds)
    for (int rep = 0; rep < 50; ++rep) {
      const int d = r.integer(1, 3);
      const auto h = random_hyper(d, kind, r);
      const auto pts = random_points(2, d, r);
      EXPECT_NEAR(k_nonsep(pts[0], pts[1], h, kind), reference_kernel(pts[0], pts[1], h, kind),
                  1e-13);
    }
}

TEST(NonsepKernel, EqualTuningReduction) {
  TestRng r(6);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = r.integer(1, 3);
    auto h = random_hyper(d, KernelKind::SqExp, r);
    auto pts = random_points(2, d, r);
    pts[1].t = pts[0].t;
    double s = (pts[0].y - pts[1].y) * (pts[0].y - pts[1].y) / h.theta_y;
    for (int j = 0; j < d; ++j) s += std::pow(pts[0].x(j) - pts[1].x(j), 2) / h.theta_x(j);
    const double k0 = k_nonsep(pts[0], pts[1], h, KernelKind::SqExp);
    EXPECT_NEAR(k0, std::exp(-s), 1e-14);
    h.theta_t *= 7.0;
    h.beta = 0.1;
    h.delta = 4.0;
    EXPECT_EQ(k_nonsep(pts[0], pts[1], h, KernelKind::SqExp), k0);
  }
}

TEST(NonsepKernel, BetaZeroFactorizes) {
  TestRng r(7);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = r.integer(1, 3);
    auto h = random_hyper(d, KernelKind::SqExp, r);
    h.beta = 0.0;
    const auto pts = random_points(2, d, r);
    const double dt = pts[0].t - pts[1].t;
    double s = (pts[0].y - pts[1].y) * (pts[0].y - pts[1].y) / h.theta_y;
    for (int j = 0; j < d; ++j) s += std::pow(pts[0].x(j) - pts[1].x(j), 2) / h.theta_x(j);
    const double expect = std::pow(1.0 + dt * dt / h.theta_t, -h.delta) * std::exp(-s);
    EXPECT_NEAR(k_nonsep(pts[0], pts[1], h, KernelKind::SqExp), expect, 1e-12);
  }
}

TEST(NonsepKernel, SymmetricAndBounded) {
  TestRng r(8);
  for (KernelKind kind : kAllKinds)
    for (int rep = 0; rep < 50; ++rep) {
      const int d = r.integer(1, 3);
      const auto h = random_hyper(d, kind, r);
      const auto pts = random_points(2, d, r);
      const double a = k_nonsep(pts[0], pts[1], h, kind);
      EXPECT_EQ(a, k_nonsep(pts[1], pts[0], h, kind));
      EXPECT_GT(a, 0.0);
      EXPECT_LE(a, 1.0);
    }
}

TEST(Gram, Examples) {
  NonsepHyper h{VectorXd::Ones(1), 1.0, 1.0, 1.0, 0.5};
  for (KernelKind kind : kAllKinds) {
    EXPECT_EQ(gram({pt(0.5, {0.1}, 1.0)}, h, kind), MatrixXd::Ones(1, 1));
    EXPECT_EQ(gram({pt(0.5, {0.1}, 1.0), pt(0.5, {0.1}, 1.0)}, h, kind), MatrixXd::Ones(2, 2));
  }
  const MatrixXd K = gram({pt(1, {0.4}, 2), pt(0, {0.4}, 2)}, h, KernelKind::SqExp);
  EXPECT_NEAR(K(0, 1), 0.353553390593274, 1e-12);
  EXPECT_EQ(K(0, 1), K(1, 0));
}

TEST(Gram, PositiveSemidefinite) {
  TestRng r(9);
  for (KernelKind kind : kAllKinds)
    for (int rep = 0; rep < 10; ++rep) {
      const int d = r.integer(1, 3);
      const auto h = random_hyper(d, kind, r);
      const MatrixXd K = gram(random_points(r.integer(2, 50), d, r), h, kind);
      EXPECT_GE(extreme_eigenvalues(K).first, -1e-8);
    }
}

TEST(GramGrad, ZeroCases) {
  NonsepHyper h{VectorXd::Ones(2), 1.3, 0.7, 0.4, 0.9};
  std::vector<AugmentedPoint> same_t = {pt(0.5, {0.1, 0.2}, 1.0), pt(0.5, {0.6, 0.9}, -1.0)};
  std::vector<AugmentedPoint> same_x0 = {pt(0.5, {0.1, 0.2}, 1.0), pt(0.9, {0.1, 0.9}, -1.0)};
  for (KernelKind kind : kAllKinds) {
    const MatrixXd Gd = gram_grad(same_t, h, kind, {HyperIndex::Kind::Delta, 0});
    EXPECT_EQ(Gd.cwiseAbs().maxCoeff(), 0.0);
    const MatrixXd Gx = gram_grad(same_x0, h, kind, {HyperIndex::Kind::ThetaX, 0});
    EXPECT_EQ(Gx.cwiseAbs().maxCoeff(), 0.0);
  }
}

// Central differences of the reference kernel on the log-parameter (raw for beta, delta).
TEST(GramGrad, MatchesFiniteDifferencesOfReference) {
  TestRng r(10);
  int checked = 0;
  for (KernelKind kind : kAllKinds)
    for (int rep = 0; rep < 15; ++rep) {
      const int d = r.integer(1, 3);
      const auto h = random_hyper(d, kind, r);
      const auto pts = random_points(r.integer(2, 6), d, r);
      std::vector<MatrixXd> G;
      gram_with_grads(AugmentedInputs::from_points(pts), h, kind, G);
      for (int idx = 0; idx < num_hyper(d); ++idx) {
        const bool logp = idx < d + 2;
        const double v = param(h, idx), eps = 1e-6;
        const double vp = logp ? v * std::exp(eps) : v + eps;
        const double vm = logp ? v * std::exp(-eps) : v - eps;
        for (std::size_t i = 0; i < pts.size(); ++i)
          for (std::size_t k = 0; k < i; ++k) {
            const double fd = (reference_kernel(pts[i], pts[k], with_param(h, idx, vp), kind) -
                               reference_kernel(pts[i], pts[k], with_param(h, idx, vm), kind)) /
                              (2 * eps);
            const double an = G[idx](i, k) * (logp ? v : 1.0);
            EXPECT_LE(std::abs(fd - an), 1e-5 * std::max(std::abs(fd), 1e-3))
                << to_string(kind) << " param " << idx;
            ++checked;
          }
      }
    }
  EXPECT_GT(checked, 1000);
}

TEST(GramGrad, BetaGradientAtEqualTuningIsFinite) {
  NonsepHyper h{VectorXd::Ones(1), 1.0, 1.0, 0.0, 0.5};
  for (KernelKind kind : kAllKinds) {
    const MatrixXd G = gram_grad({pt(0.5, {0.1}, 1.0), pt(0.5, {0.4}, -1.0)}, h, kind,
                                {HyperIndex::Kind::Beta, 0});
    EXPECT_EQ(G(0, 1), 0.0);
  }
}

TEST(Conditioning, DeltaZeroIsSingularDeltaHalfIsNot) {
  // Two tuning values, five shared inputs, huge theta_y, beta = 0.
  std::vector<AugmentedPoint> pts;
  for (double t : {1.0, 2.0})
    for (int i = 0; i < 5; ++i) pts.push_back(pt(t, {0.2 * i}, 0.3 * i));
  NonsepHyper h{VectorXd::Constant(1, 0.05), 1e12, 1.0, 0.0, 0.0};
  auto ratio = [&](double delta) {
    h.delta = delta;
    const auto [lo, hi] = extreme_eigenvalues(gram(pts, h, KernelKind::SqExp));
    return lo / hi;
  };
  EXPECT_LE(ratio(0.0), 1e-10);
  EXPECT_GE(ratio(0.5), 1e-10);
}

TEST(QueryFactors, ReproduceKernelRow) {
  TestRng r(12);
  for (KernelKind kind : kAllKinds)
    for (int rep = 0; rep < 10; ++rep) {
      const int d = r.integer(1, 3);
      const auto h = random_hyper(d, kind, r);
      const auto train = random_points(7, d, r);
      const auto q = random_points(1, d, r)[0];
      const auto a = AugmentedInputs::from_points(train);
      const auto f = query_factors(a, h, kind, q.t, q.x);
      for (int i = 0; i < 7; ++i)
        EXPECT_NEAR(f.w(i) * y_factor(kind, h, f.c(i), q.y - a.y(i)),
                    reference_kernel(q, train[i], h, kind), 1e-13);
    }
}

TEST(KernelKindNames, RoundTrip) {
  for (KernelKind kind : kAllKinds) EXPECT_EQ(parse_kernel_kind(to_string(kind)), kind);
  EXPECT_THROW(parse_kernel_kind("rbf"), ConfigError);
}
