#include <gtest/gtest.h>

#include <algorithm>

#include "test_util.hpp"

using namespace dnamf;
using namespace dnamf::testing;

namespace {
VectorXd v(std::initializer_list<double> x) {
  return Eigen::Map<const VectorXd>(x.begin(), static_cast<Eigen::Index>(x.size()));
}
}  // namespace

TEST(Schedule, TableRows) {
  const auto a = make_schedule(2.5, 0.7, 2.0, 1, 5);
  EXPECT_EQ(a.n, (std::vector<int>{17, 8, 4, 2, 1}));
  const auto c = make_schedule(2.5, 0.7, 2.0, 2, 6);
  EXPECT_EQ(c.n, (std::vector<int>{71, 35, 17, 8, 4, 2}));
  const auto h = make_schedule(1.0, 0.5, 1.0, 1, 3);
  EXPECT_EQ(h.n, (std::vector<int>{4, 2, 1}));
}

TEST(Schedule, GeometricTuningValues) {
  const auto s = make_schedule(2.5, 0.7, 2.0, 1, 5);
  EXPECT_EQ(s.t.front(), 2.5);
  for (std::size_t l = 1; l < s.t.size(); ++l) EXPECT_DOUBLE_EQ(s.t[l], 0.7 * s.t[l - 1]);
}

TEST(Schedule, RejectsInvalidParameters) {
  EXPECT_THROW(make_schedule(2.5, 1.0, 2.0, 1, 5), ConfigError);
  EXPECT_THROW(make_schedule(2.5, 0.0, 2.0, 1, 5), ConfigError);
  EXPECT_THROW(make_schedule(2.5, 0.7, 0.0, 1, 5), ConfigError);
  EXPECT_THROW(make_schedule(2.5, 0.7, 2.0, 0, 5), ConfigError);
  EXPECT_THROW(make_schedule(2.5, 0.7, 2.0, 1, 1), ConfigError);
  EXPECT_THROW(make_schedule(-1.0, 0.7, 2.0, 1, 5), ConfigError);
}

TEST(Schedule, RoundingIsHalfAwayFromZero) {
  EXPECT_EQ(round_half_away(16.5), 17);
  EXPECT_EQ(round_half_away(2.5), 3);
  EXPECT_EQ(round_half_away(-2.5), -3);
  EXPECT_EQ(round_half_away(34.69), 35);
  EXPECT_EQ(round_half_away(16.49), 16);
}

TEST(Benchmarks, PointValues) {
  EXPECT_NEAR(eval_benchmark(BenchmarkFn::Additive, 1.7, v({0.0})), 1.0, 1e-15);
  EXPECT_NEAR(eval_benchmark(BenchmarkFn::NonAdditive, 0.9, v({0.0})), 0.0, 1e-15);
  EXPECT_NEAR(eval_benchmark(BenchmarkFn::Currin, 0.0, v({1.0, 1.0})), 4.005316104976526, 1e-12);
  const Domain d = benchmark_domain(BenchmarkFn::Borehole);
  const VectorXd mid = 0.5 * (d.lower + d.upper);
  EXPECT_NEAR(eval_benchmark(BenchmarkFn::Borehole, 0.0, mid), 70.87291263681894, 1e-10);
}

TEST(Benchmarks, AdditiveExactSolutionAtZero) {
  TestRng r(71);
  for (int i = 0; i < 20; ++i) {
    const double x = r.uniform();
    EXPECT_NEAR(eval_benchmark(BenchmarkFn::Additive, 0.0, v({x})),
                std::exp(-1.4 * x) * std::cos(3.5 * M_PI * x), 1e-12);
  }
}

TEST(Benchmarks, DomainViolations) {
  EXPECT_THROW(eval_benchmark(BenchmarkFn::Additive, 0.0, v({1.5})), DomainViolation);
  EXPECT_THROW(eval_benchmark(BenchmarkFn::Additive, -0.1, v({0.5})), DomainViolation);
  EXPECT_THROW(eval_benchmark(BenchmarkFn::Currin, 0.0, v({0.5})), DomainViolation);
  EXPECT_NO_THROW(eval_benchmark(BenchmarkFn::Currin, 0.0, v({0.5, 0.0})));
}

TEST(Benchmarks, NamesAndDefaults) {
  for (auto f : {BenchmarkFn::Additive, BenchmarkFn::NonAdditive, BenchmarkFn::Currin,
                 BenchmarkFn::Borehole})
    EXPECT_EQ(parse_benchmark(to_string(f)), f);
  EXPECT_THROW(parse_benchmark("branin"), ConfigError);
  EXPECT_EQ(benchmark_dim(BenchmarkFn::Borehole), 8);
  EXPECT_EQ(benchmark_defaults(BenchmarkFn::Currin).levels, 6);
}

TEST(NestedDesign, TwoLevelUnit) {
  const Domain dom{VectorXd::Zero(1), VectorXd::Ones(1)};
  const auto X = nested_design({2, 1}, 1, dom, 3);
  ASSERT_EQ(X.size(), 2u);
  EXPECT_TRUE(X[1](0, 0) == X[0](0, 0) || X[1](0, 0) == X[0](1, 0));
}

TEST(NestedDesign, AlwaysNestedAndDeterministic) {
  const Domain dom = benchmark_domain(BenchmarkFn::Borehole);
  const auto a = nested_design({17, 8, 4, 2, 1}, 8, dom, 12);
  const auto b = nested_design({17, 8, 4, 2, 1}, 8, dom, 12);
  for (std::size_t l = 0; l < a.size(); ++l) EXPECT_EQ(a[l], b[l]);
  for (std::size_t l = 1; l < a.size(); ++l)
    EXPECT_EQ(a[l], a[l - 1].topRows(a[l].rows()));
  for (Eigen::Index j = 0; j < 8; ++j) {
    EXPECT_GE(a[0].col(j).minCoeff(), dom.lower(j));
    EXPECT_LE(a[0].col(j).maxCoeff(), dom.upper(j));
  }
}

TEST(NestedDesign, MoreSpaceFillingThanRandom) {
  const Domain dom{VectorXd::Zero(1), VectorXd::Ones(1)};
  std::vector<double> design, random;
  TestRng r(72);
  for (int s = 0; s < 20; ++s) {
    design.push_back(min_pairwise_distance(nested_design({17, 8, 4, 2, 1}, 1, dom, s)[0]));
    MatrixXd U(17, 1);
    for (int i = 0; i < 17; ++i) U(i, 0) = r.uniform();
    random.push_back(min_pairwise_distance(U));
  }
  std::nth_element(design.begin(), design.begin() + 10, design.end());
  std::nth_element(random.begin(), random.begin() + 10, random.end());
  EXPECT_GE(design[10], random[10]);
}

TEST(NestedDesign, SubsetsAreSpreadOut) {
  // Greedy maximin subsets beat the first rows of an unordered design on average.
  const Domain dom{VectorXd::Zero(2), VectorXd::Ones(2)};
  const auto X = nested_design({30, 6}, 2, dom, 5);
  EXPECT_GT(min_pairwise_distance(X[1]), 0.2);
}

TEST(GenerateData, TableSizesAndValues) {
  const auto s = make_schedule(2.5, 0.7, 2.0, 1, 5);
  const auto d = generate_benchmark_data(BenchmarkFn::Additive, s, 9);
  EXPECT_EQ(d.num_levels(), 5);
  EXPECT_EQ(d.total_points(), 32);
  EXPECT_TRUE(check_nested(d));
  for (int l = 0; l < d.num_levels(); ++l)
    for (Eigen::Index i = 0; i < d.level(l).size(); ++i)
      EXPECT_EQ(d.level(l).y(i),
                eval_benchmark(BenchmarkFn::Additive, d.level(l).t, d.level(l).X.row(i).transpose()));
}

TEST(GenerateData, IndependentDesignsAreNotNested) {
  const auto s = make_schedule(2.5, 0.7, 2.0, 1, 5);
  const auto d = generate_benchmark_data(BenchmarkFn::NonAdditive, s, 9, false);
  EXPECT_FALSE(check_nested(d));
  EXPECT_EQ(d.total_points(), 32);
}

TEST(GenerateData, RandomInputsInsideDomain) {
  const auto X = random_inputs(BenchmarkFn::Borehole, 50, 4);
  const Domain dom = benchmark_domain(BenchmarkFn::Borehole);
  for (Eigen::Index j = 0; j < 8; ++j) {
    EXPECT_GE(X.col(j).minCoeff(), dom.lower(j));
    EXPECT_LE(X.col(j).maxCoeff(), dom.upper(j));
  }
  EXPECT_EQ(X, random_inputs(BenchmarkFn::Borehole, 50, 4));
}
