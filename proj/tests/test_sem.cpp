#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace dnamf;
using namespace dnamf::testing;

namespace {

MatrixXd col(std::initializer_list<double> v) {
  MatrixXd X(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double a : v) X(i++, 0) = a;
  return X;
}

double fn(double t, double x) { return std::exp(-1.4 * x) * std::cos(3.5 * M_PI * x) + t * x * x; }

FidelityLevel level(double t, std::initializer_list<double> xs) {
  FidelityLevel lv;
  lv.t = t;
  lv.X = col(xs);
  lv.y.resize(lv.X.rows());
  for (Eigen::Index i = 0; i < lv.X.rows(); ++i) lv.y(i) = fn(t, lv.X(i, 0));
  return lv;
}

MultiFidelityData small_non_nested() {
  return MultiFidelityData({level(1.0, {0.0, 0.15, 0.3, 0.45, 0.6, 0.75, 0.9, 1.0}),
                            level(0.6, {0.1, 0.3, 0.55, 0.8}), level(0.3, {0.2, 0.65})});
}

}  // namespace

TEST(PseudoDesign, TwoLevelExample) {
  const MultiFidelityData d({level(1.0, {0.0, 0.5, 1.0}), level(0.5, {0.25, 0.5})});
  const auto pd = build_pseudo_design(d);
  ASSERT_EQ(pd.size(), 2u);
  EXPECT_EQ(pd[1].X, col({0.25, 0.5}));
  EXPECT_EQ(pd[1].source, (std::vector<int>{0, 1}));
  EXPECT_EQ(pd[0].X, col({0.25, 0.5, 0.0, 1.0}));
  EXPECT_EQ(pd[0].source, (std::vector<int>{-1, 1, 0, 2}));
  EXPECT_EQ(total_pseudo(pd), 1);
}

TEST(PseudoDesign, ThreeLevelsCarryPseudoRowsDown) {
  const auto pd = build_pseudo_design(small_non_nested());
  EXPECT_EQ(pd[2].num_pseudo(), 0);
  EXPECT_EQ(pd[1].num_pseudo(), 2);
  EXPECT_EQ(pd[1].X.rows(), 6);
  EXPECT_EQ(pd[0].X.rows(), 6 + 7);  // 0.3 is shared with the level-1 design
  EXPECT_EQ(pd[0].num_pseudo(), 5);
  for (std::size_t l = 1; l < pd.size(); ++l)
    EXPECT_EQ(pd[l].X, pd[l - 1].X.topRows(pd[l].X.rows()));
}

TEST(PseudoDesign, NestedDataNeedsNoPseudoPoints) {
  EXPECT_EQ(total_pseudo(build_pseudo_design(tiny_nested_data(2))), 0);
}

TEST(Sem, BurnIn) {
  EXPECT_EQ(burn_in_for(100), 75);
  EXPECT_EQ(burn_in_for(4), 3);
  EXPECT_EQ(burn_in_for(10), 8);
  EXPECT_EQ(burn_in_for(7), 6);
}

TEST(Sem, MixtureIdentity) {
  TestRng r(101);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> mu, v;
    const int n = r.integer(1, 60);
    for (int i = 0; i < n; ++i) {
      mu.push_back(r.normal() * 2);
      v.push_back(r.uniform(0, 1.5));
    }
    double m = 0, ev = 0, vm = 0;
    for (int i = 0; i < n; ++i) {
      m += mu[i] / n;
      ev += v[i] / n;
    }
    for (int i = 0; i < n; ++i) vm += (mu[i] - m) * (mu[i] - m) / n;
    const auto mm = mixture_moments(mu, v);
    EXPECT_NEAR(mm.mean, m, 1e-10);
    EXPECT_NEAR(mm.var, ev + vm, 1e-10);
    EXPECT_GE(mm.var, ev - 1e-12);
  }
}

TEST(Sem, RejectsBadIterationCounts) {
  EXPECT_THROW(sem_fit(small_non_nested(), KernelKind::SqExp, 3, 1), ConfigError);
}

TEST(Sem, NestedDataDegeneratesToPlainFit) {
  const auto s = make_schedule(2.5, 0.7, 2.0, 1, 5);
  const auto d = generate_benchmark_data(BenchmarkFn::Additive, s, 3);
  const auto sf = sem_fit(d, KernelKind::SqExp, 6, 11);
  const auto m = fit(d, KernelKind::SqExp, {}, 11);
  EXPECT_TRUE(sf.state.trivial());
  EXPECT_EQ(sf.state.chain.size(), 7u);
  const MatrixXd X = random_inputs(BenchmarkFn::Additive, 15, 2);
  const auto a = sem_predict(sf.model, sf.state, X, 0.0, 10, 4);
  const auto b = predict_batch(m, X, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].mean, b[i].mean, 1e-8);
    EXPECT_NEAR(a[i].var, b[i].var, 1e-8);
  }
}

TEST(EStep, KeepsObservedAndFillsPseudo) {
  const auto d = small_non_nested();
  auto [state, params] = sem_init(d, KernelKind::SqExp, {}, 7);
  const auto y = e_step(state, params, KernelKind::SqExp, 3);
  for (std::size_t l = 0; l < y.size(); ++l)
    for (std::size_t i = 0; i < state.design[l].source.size(); ++i) {
      const int src = state.design[l].source[i];
      if (src >= 0) {
        EXPECT_EQ(y[l](static_cast<Eigen::Index>(i)), d.level(static_cast<int>(l)).y(src));
      }
      EXPECT_TRUE(std::isfinite(y[l](static_cast<Eigen::Index>(i))));
    }
  EXPECT_EQ(y, e_step(state, params, KernelKind::SqExp, 3));
  EXPECT_NE(y[0], e_step(state, params, KernelKind::SqExp, 4)[0]);
}

TEST(EStep, LevelOneDrawsMatchPosteriorMean) {
  const auto d = small_non_nested();
  auto [state, params] = sem_init(d, KernelKind::SqExp, {}, 7);
  const auto rows = detail::pseudo_rows(state.design[0]);
  MatrixXd Xq(static_cast<Eigen::Index>(rows.size()), 1);
  for (std::size_t i = 0; i < rows.size(); ++i) Xq.row(static_cast<Eigen::Index>(i)) = state.design[0].X.row(rows[i]);
  const Level1Model l1 = make_level1(d.level(0).X, d.level(0).y, params.level1_hyper, params.alpha1, params.tau2_1);
  const auto [mean, cov] = posterior_level1_joint(l1, Xq);
  const int n = 2000;
  VectorXd sum = VectorXd::Zero(mean.size());
  for (int s = 0; s < n; ++s) {
    const auto y = e_step(state, params, KernelKind::SqExp, static_cast<std::uint64_t>(s));
    for (std::size_t i = 0; i < rows.size(); ++i) sum(static_cast<Eigen::Index>(i)) += y[0](rows[i]);
  }
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double se = std::sqrt(std::max(cov(i, i), 1e-30) / n);
    EXPECT_NEAR(sum(i) / n, mean(i), 4.5 * se + 1e-9);
  }
}

TEST(Sem, ChainShapeAndDeterminism) {
  const auto d = small_non_nested();
  const auto a = sem_fit(d, KernelKind::SqExp, 6, 21);
  const auto b = sem_fit(d, KernelKind::SqExp, 6, 21);
  EXPECT_EQ(a.state.chain.size(), 7u);
  EXPECT_EQ(a.state.burn_in, 5);
  EXPECT_EQ(a.model.objective, b.model.objective);
  EXPECT_EQ(a.model.hyper.beta, b.model.hyper.beta);
  const MatrixXd X = col({0.05, 0.5, 0.95});
  const auto pa = sem_predict(a.model, a.state, X, 0.0, 5, 9);
  const auto pb = sem_predict(b.model, b.state, X, 0.0, 5, 9);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].mean, pb[i].mean);
    EXPECT_GT(pa[i].var, 0.0);
  }
  EXPECT_THROW(sem_predict(a.model, a.state, X, 0.0, 0, 9), ConfigError);
}

TEST(Sem, StateJsonRoundTrip) {
  const auto d = small_non_nested();
  const auto f = sem_fit(d, KernelKind::Matern25, 4, 5);
  const SemState back = sem_from_json(sem_to_json(f.state));
  ASSERT_EQ(back.design.size(), f.state.design.size());
  for (std::size_t l = 0; l < back.design.size(); ++l) {
    EXPECT_EQ(back.design[l].X, f.state.design[l].X);
    EXPECT_EQ(back.design[l].source, f.state.design[l].source);
    EXPECT_EQ(back.y[l], f.state.y[l]);
  }
  const auto re = model_from_json(nlohmann::json::parse(model_to_json(f.model, &f.state).dump()));
  ASSERT_TRUE(re.sem.has_value());
  const MatrixXd X = col({0.33});
  EXPECT_EQ(sem_predict(re.model, *re.sem, X, 0.0, 3, 1)[0].mean,
            sem_predict(f.model, f.state, X, 0.0, 3, 1)[0].mean);
}
