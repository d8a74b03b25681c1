#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rgg/limit_laws.hpp"
#include "rgg/sampling.hpp"
#include "rgg/stats.hpp"

using namespace rgg;

namespace {

double uniform_cdf(double x) { return std::clamp(x, 0.0, 1.0); }

// Textbook form for distinct values: max over i of i/n - F(x_(i)) and F(x_(i)) - (i-1)/n.
double ks_sorted(std::vector<double> v, const std::function<double(double)>& cdf) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    d = std::max({d, (i + 1) / n - cdf(v[i]), cdf(v[i]) - i / n});
  }
  return d;
}

double poisson_term(double lambda, std::int64_t k) {
  return std::exp(-lambda + k * std::log(lambda) - std::lgamma(k + 1.0));
}

}  // namespace

TEST(EmpiricalSample, EcdfAndQuantile) {
  const EmpiricalSample s({3.0, 1.0, 2.0, 2.0});
  EXPECT_EQ(s.ecdf(0.5), 0.0);
  EXPECT_EQ(s.ecdf(1.0), 0.25);
  EXPECT_EQ(s.ecdf(2.0), 0.75);
  EXPECT_EQ(s.ecdf(10.0), 1.0);
  EXPECT_EQ(s.steps().size(), 3u);
  EXPECT_EQ(s.median(), 2.0);
  EXPECT_EQ(s.quantile(0.1), 1.0);
  EXPECT_THROW(EmpiricalSample({1.0, NAN}), std::invalid_argument);
}

TEST(EmpiricalSample, Weighted) {
  const EmpiricalSample s({1.0, 2.0}, {3.0, 1.0});
  EXPECT_EQ(s.ecdf(1.0), 0.75);
  EXPECT_THROW(EmpiricalSample({1.0}, {-1.0}), std::invalid_argument);
  EXPECT_THROW(EmpiricalSample({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST(KsDistance, Examples) {
  EXPECT_DOUBLE_EQ(ks_distance(EmpiricalSample({0.5}), uniform_cdf), 0.5);
  // Values at (i - 1/2) / n give the smallest possible distance 1 / (2n).
  std::vector<double> mid;
  for (int i = 0; i < 10; ++i) mid.push_back((i + 0.5) / 10.0);
  EXPECT_NEAR(ks_distance(EmpiricalSample(mid), uniform_cdf), 0.05, 1e-15);
  EXPECT_NEAR(ks_distance(EmpiricalSample({2.0, 3.0}), uniform_cdf), 1.0, 1e-15);
  EXPECT_THROW(ks_distance(EmpiricalSample(), uniform_cdf), std::invalid_argument);
}

TEST(KsDistance, MatchesSortedFormula) {
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> u;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(1 + eng() % 300);
    for (double& x : v) x = u(eng) * u(eng);
    EXPECT_NEAR(ks_distance(EmpiricalSample(v), uniform_cdf), ks_sorted(v, uniform_cdf), 1e-15);
  }
}

TEST(KsDistance, InvariantUnderMonotoneMaps) {
  std::mt19937_64 eng(2);
  std::normal_distribution<double> g;
  std::vector<double> v(500), w(500);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = g(eng);
    w[i] = v[i] * v[i] * v[i];
  }
  auto phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  auto phi_cube = [&](double y) { return phi(std::cbrt(y)); };
  EXPECT_NEAR(ks_distance(EmpiricalSample(v), phi), ks_distance(EmpiricalSample(w), phi_cube), 1e-12);
}

TEST(KsDistance, ShrinksWithSampleSize) {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u;
  std::vector<double> v(20000);
  for (double& x : v) x = u(eng);
  EXPECT_LT(ks_distance(EmpiricalSample(v), uniform_cdf), 1.63 / std::sqrt(20000.0));
}

TEST(Pmf, PoissonTable) {
  const Pmf p = poisson_pmf_table(3.0);
  EXPECT_NEAR(p.at(0), std::exp(-3.0), 1e-15);
  EXPECT_NEAR(p.mean(), 3.0, 1e-9);
  EXPECT_NEAR(p.variance(), 3.0, 1e-9);
  EXPECT_LT(p.tail, 1e-12);
  EXPECT_EQ(p.at(-1), 0.0);
  const Pmf z = poisson_pmf_table(0.0);
  EXPECT_EQ(z.at(0), 1.0);
}

TEST(CompoundPoisson, MatchesDirectSum) {
  const CompoundPoissonLaw law{{{1, 0.7}, {3, 0.4}}};
  const Pmf p = compound_poisson_pmf(law);
  for (std::int64_t m = 0; m < 25; ++m) {
    double direct = 0.0;
    for (std::int64_t b = 0; 3 * b <= m; ++b) direct += poisson_term(0.7, m - 3 * b) * poisson_term(0.4, b);
    EXPECT_NEAR(p.at(m), direct, 1e-12) << m;
  }
  EXPECT_NEAR(p.mean(), 0.7 + 3 * 0.4, 1e-9);
  EXPECT_NEAR(p.variance(), 0.7 + 9 * 0.4, 1e-9);
}

TEST(CompoundPoisson, DegenerateCases) {
  const Pmf empty = compound_poisson_pmf({});
  EXPECT_EQ(empty.at(0), 1.0);
  const Pmf single = compound_poisson_pmf({{{1, 2.0}}});
  const Pmf poisson = poisson_pmf_table(2.0);
  EXPECT_LT(tv_distance(single, poisson), 1e-12);
  const Pmf doubled = compound_poisson_pmf({{{2, 1.5}}});
  EXPECT_EQ(doubled.at(1), 0.0);
  EXPECT_NEAR(doubled.at(2), 1.5 * std::exp(-1.5), 1e-15);
  EXPECT_THROW(compound_poisson_pmf({{{0, 1.0}}}), std::invalid_argument);
}

TEST(TvDistance, Properties) {
  const Pmf a = poisson_pmf_table(1.0);
  const Pmf b = poisson_pmf_table(4.0);
  EXPECT_EQ(tv_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(tv_distance(a, b), tv_distance(b, a));
  EXPECT_LE(tv_distance(a, b), 1.0);
  const Pmf c = poisson_pmf_table(2.0);
  EXPECT_LE(tv_distance(a, b), tv_distance(a, c) + tv_distance(c, b) + 1e-15);
  Pmf point0{{1.0}, 0.0};
  Pmf point1{{0.0, 1.0}, 0.0};
  EXPECT_EQ(tv_distance(point0, point1), 1.0);
  const std::vector<std::int64_t> sample{0, 0, 1, 1};
  Pmf half{{0.5, 0.5}, 0.0};
  EXPECT_EQ(tv_distance(half, sample), 0.0);
}

TEST(Correlation, Examples) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{2, 4, 6, 8};
  const std::vector<double> z{4, 3, 2, 1};
  const std::vector<double> c{1, 1, 1, 1};
  EXPECT_NEAR(pearson_correlation(x, y), 1.0, 1e-15);
  EXPECT_NEAR(pearson_correlation(x, z), -1.0, 1e-15);
  EXPECT_EQ(pearson_correlation(x, c), 0.0);
}

TEST(BoxCounts, WeightsAndDisjointness) {
  PointMatrix p(1, 3);
  p << -0.4, 0.1, 0.2;
  const std::vector<Box> boxes{{Eigen::VectorXd::Constant(1, -0.5), Eigen::VectorXd::Constant(1, 0.0)},
                               {Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 0.5)}};
  EXPECT_EQ(box_counts(p, boxes), (std::vector<std::int64_t>{1, 2}));
  const std::vector<int> w{2, 3, 1};
  EXPECT_EQ(box_counts(p, boxes, w), (std::vector<std::int64_t>{2, 4}));
  const std::vector<Box> overlapping{boxes[0], {Eigen::VectorXd::Constant(1, -0.1), Eigen::VectorXd::Constant(1, 0.3)}};
  EXPECT_THROW(check_disjoint(overlapping), std::invalid_argument);
}

TEST(BoxCountTest, IndependentPoissonBoxes) {
  const Density f = Density::uniform_cube(2);
  const std::vector<Box> boxes = {{Eigen::Vector2d(-0.5, -0.5), Eigen::Vector2d(0.0, 0.0)},
                                  {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(0.5, 0.5)}};
  std::vector<PointMatrix> reps;
  for (int i = 0; i < 5000; ++i) {
    RngStream rng(21, i);
    reps.push_back(sample_poisson_process(8.0, f, rng).points);
  }
  const std::vector<Pmf> refs(2, poisson_pmf_table(2.0));
  const BoxCountReport report = box_count_test(reps, boxes, refs);
  ASSERT_EQ(report.pairs.size(), 1u);
  EXPECT_LT(report.max_tv, 0.03);
  EXPECT_GT(report.min_p_value, 1e-3);
}

TEST(BoxCountTest, DetectsDependence) {
  std::vector<std::vector<std::int64_t>> counts;
  std::mt19937_64 eng(4);
  std::poisson_distribution<std::int64_t> po(2.0);
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t c = po(eng);
    counts.push_back({c, c});
  }
  const std::vector<Pmf> refs(2, poisson_pmf_table(2.0));
  const BoxCountReport report = box_count_test(counts, refs);
  EXPECT_NEAR(report.max_abs_correlation, 1.0, 1e-12);
  EXPECT_LT(report.min_p_value, 1e-10);
  EXPECT_THROW(box_count_test(std::vector<std::vector<std::int64_t>>{}, refs), std::invalid_argument);
}
