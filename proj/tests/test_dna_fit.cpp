#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace dnamf;
using namespace dnamf::testing;

namespace {

const KernelKind kAllKinds[] = {KernelKind::SqExp, KernelKind::Matern15, KernelKind::Matern25};

TrainingAssembly random_assembly(int n, int d, TestRng& r) {
  TrainingAssembly a;
  a.inputs = AugmentedInputs::from_points(random_points(n, d, r));
  a.y_out.resize(n);
  for (int i = 0; i < n; ++i)
    a.y_out(i) = std::sin(2 * a.inputs.X(i, 0)) + 0.5 * a.inputs.y(i) + 0.2 * a.inputs.t(i);
  a.level_of_row.assign(static_cast<std::size_t>(n), 1);
  return a;
}

// Independent evaluation of the profile objective from the reference kernel.
double reference_nll(const NonsepHyper& h, const TrainingAssembly& a, KernelKind kind) {
  const Eigen::Index n = a.size();
  std::vector<AugmentedPoint> pts;
  for (Eigen::Index i = 0; i < n; ++i)
    pts.push_back({a.inputs.t(i), a.inputs.X.row(i).transpose(), a.inputs.y(i)});
  MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k)
      K(i, k) = i == k ? 1.0 : reference_kernel(pts[i], pts[k], h, kind);
  K.diagonal().array() += 1e-8;
  Eigen::LDLT<MatrixXd> ldlt(K);
  const VectorXd one = VectorXd::Ones(n);
  const double al = one.dot(ldlt.solve(a.y_out)) / one.dot(ldlt.solve(one));
  const VectorXd r = a.y_out - al * one;
  return 0.5 * ldlt.vectorD().array().log().sum() + 0.5 * n * std::log(r.dot(ldlt.solve(r)));
}

}  // namespace

TEST(DnaMle, IdentityKernelExamples) {
  const auto F = cholesky(MatrixXd::Identity(3, 3), 0.0);
  VectorXd y(3);
  y << 1, 2, 3;
  auto ms = mle_mean_scale(y, F);
  EXPECT_NEAR(ms.alpha, 2.0, 1e-14);
  EXPECT_NEAR(ms.tau2, 2.0 / 3.0, 1e-14);
  ms = mle_mean_scale(VectorXd::Constant(3, 4.2), F);
  EXPECT_NEAR(ms.alpha, 4.2, 1e-14);
  EXPECT_NEAR(ms.tau2, 0.0, 1e-14);
  VectorXd y2(2);
  y2 << -1, 1;
  ms = mle_mean_scale(y2, cholesky(MatrixXd::Identity(2, 2), 0.0));
  EXPECT_NEAR(ms.alpha, 0.0, 1e-14);
  EXPECT_NEAR(ms.tau2, 1.0, 1e-14);
}

TEST(ProfileNll, ValueMatchesReference) {
  TestRng r(41);
  for (KernelKind kind : kAllKinds)
    for (int rep = 0; rep < 10; ++rep) {
      const int d = r.integer(1, 2);
      const auto a = random_assembly(r.integer(3, 9), d, r);
      const auto h = random_hyper(d, kind, r);
      EXPECT_NEAR(profile_neg_loglik(h, a, kind).value, reference_nll(h, a, kind), 1e-7);
    }
}

TEST(ProfileNll, GradientMatchesFiniteDifferences) {
  TestRng r(42);
  for (KernelKind kind : kAllKinds)
    for (int rep = 0; rep < 10; ++rep) {
      const int d = r.integer(1, 2);
      const auto a = random_assembly(r.integer(3, 9), d, r);
      const auto h = random_hyper(d, kind, r);
      const auto lv = profile_neg_loglik(h, a, kind);
      const VectorXd w = to_working(h);
      for (Eigen::Index m = 0; m < w.size(); ++m) {
        const double eps = 1e-6;
        VectorXd wp = w, wm = w;
        wp(m) += eps;
        wm(m) -= eps;
        const double fd = (reference_nll(from_working(wp), a, kind) -
                           reference_nll(from_working(wm), a, kind)) / (2 * eps);
        const double chain = m < d + 2 ? std::exp(w(m)) : 1.0;
        EXPECT_LE(rel_err(lv.gradient(m) * chain, fd, 1e-3), 1e-4)
            << to_string(kind) << " param " << m;
      }
    }
}

TEST(ProfileNll, PermutationOfIdenticalDimensions) {
  TestRng r(43);
  auto a = random_assembly(6, 2, r);
  a.inputs.X.col(1) = a.inputs.X.col(0);
  for (KernelKind kind : kAllKinds) {
    auto h = random_hyper(2, kind, r);
    auto g = h;
    std::swap(g.theta_x(0), g.theta_x(1));
    EXPECT_NEAR(profile_neg_loglik(h, a, kind).value, profile_neg_loglik(g, a, kind).value,
                1e-12);
  }
}

TEST(ProfileNll, ConstantOutputsThrow) {
  TestRng r(44);
  auto a = random_assembly(5, 1, r);
  a.y_out.setConstant(1.5);
  EXPECT_THROW(profile_neg_loglik(random_hyper(1, KernelKind::SqExp, r), a, KernelKind::SqExp),
               DegenerateData);
}

TEST(ProfileNll, DuplicateRowsRescuedByJitter) {
  TestRng r(45);
  auto a = random_assembly(4, 1, r);
  // Identical augmented rows with different outputs.
  a.inputs.t(1) = a.inputs.t(0);
  a.inputs.X.row(1) = a.inputs.X.row(0);
  a.inputs.y(1) = a.inputs.y(0);
  const auto h = random_hyper(1, KernelKind::SqExp, r);
  const auto lv = profile_neg_loglik(h, a, KernelKind::SqExp);
  EXPECT_TRUE(std::isfinite(lv.value));
}

TEST(DnaFit, DegenerateOutputsThrow) {
  auto data = tiny_nested_data();
  std::vector<FidelityLevel> lv = data.levels();
  for (std::size_t l = 1; l < lv.size(); ++l) lv[l].y.setConstant(2.0);
  EXPECT_THROW(fit(MultiFidelityData(lv), KernelKind::SqExp, OptimizerConfig{}, 1),
               DegenerateData);
}

TEST(DnaFit, NotNestedThrows) {
  auto lv = tiny_nested_data().levels();
  lv[1].X(0, 0) += 0.01;
  EXPECT_THROW(fit(MultiFidelityData(lv), KernelKind::SqExp, OptimizerConfig{}, 1), NotNested);
}

TEST(DnaFit, BestBeatsEveryStartAndCachesAreConsistent) {
  const auto data = tiny_nested_data(2);
  for (KernelKind kind : kAllKinds) {
    DnaFitDiagnostics diag;
    const auto m = fit(data, kind, OptimizerConfig{}, 3, &diag);
    ASSERT_EQ(diag.start_values.size(), 5u);
    for (double v : diag.start_values) EXPECT_LE(m.objective, v + 1e-12);
    EXPECT_TRUE(is_valid(m.hyper));
    const auto ms = mle_mean_scale(m.assembly, m.factor);
    EXPECT_LE(rel_err(ms.alpha, m.alpha), 1e-10);
    EXPECT_LE(rel_err(ms.tau2, m.tau2), 1e-10);
    EXPECT_GT(m.tau2, 0.0);
    EXPECT_EQ(m.weights.size(), m.assembly.size());
  }
}

TEST(DnaFit, BitReproducible) {
  const auto data = tiny_nested_data(1);
  const auto a = fit(data, KernelKind::Matern25, OptimizerConfig{}, 17);
  const auto b = fit(data, KernelKind::Matern25, OptimizerConfig{}, 17);
  EXPECT_EQ(to_working(a.hyper), to_working(b.hyper));
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_EQ(a.tau2, b.tau2);
  EXPECT_EQ(a.level1.hyper.theta, b.level1.hyper.theta);
}

TEST(DnaFit, WorkingRoundTripAndBounds) {
  TestRng r(46);
  const auto h = random_hyper(3, KernelKind::SqExp, r);
  const auto g = from_working(to_working(h));
  EXPECT_LE((g.theta_x - h.theta_x).norm(), 1e-14);
  EXPECT_EQ(g.beta, h.beta);
  const auto a = random_assembly(6, 3, r);
  const auto b = dna_bounds(a, KernelKind::SqExp);
  EXPECT_EQ(b.lower(5), 0.0);
  EXPECT_EQ(b.upper(5), 1.0);
  EXPECT_EQ(b.lower(6), 0.5);
  EXPECT_EQ(b.upper(6), 5.0);
  EXPECT_TRUE((b.lower.array() < b.upper.array()).all());
}

TEST(DnaFit, AdditiveBenchmarkHasSmallBeta) {
  const auto s = make_schedule(2.5, 0.7, 2.0, 1, 5);
  const auto d = generate_benchmark_data(BenchmarkFn::Additive, s, 5);
  const auto m = fit(d, KernelKind::SqExp, OptimizerConfig{}, 5);
  EXPECT_LE(m.hyper.beta, 0.05);
}

TEST(ModelJson, RoundTripGivesIdenticalPredictions) {
  const auto data = tiny_nested_data(2);
  for (KernelKind kind : kAllKinds) {
    const auto m = fit(data, kind, OptimizerConfig{}, 8);
    const auto text = model_to_json(m).dump();
    const auto back = model_from_json(nlohmann::json::parse(text));
    EXPECT_FALSE(back.sem.has_value());
    VectorXd x(2);
    x << 0.31, 0.62;
    for (double t : {0.0, 0.3, 0.6}) {
      const auto p = propagate(m, x, t);
      const auto q = propagate(back.model, x, t);
      EXPECT_EQ(p.mean, q.mean);
      EXPECT_EQ(p.var, q.var);
    }
  }
}

TEST(ModelJson, TamperedObjectiveIsRejected) {
  const auto m = fit(tiny_nested_data(1), KernelKind::SqExp, OptimizerConfig{}, 8);
  auto j = model_to_json(m);
  j["hyper"]["beta"] = j["hyper"]["beta"].get<double>() * 0.5 + 0.25;
  EXPECT_THROW(model_from_json(j), ConfigError);
  auto k = model_to_json(m);
  k.erase("alpha");
  EXPECT_THROW(model_from_json(k), ConfigError);
}
