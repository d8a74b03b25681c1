#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "rgg/atlas.hpp"

using namespace rgg;

namespace {

SmallGraph labelled(int order, std::uint32_t mask) {
  SmallGraph g(order);
  int bit = 0;
  for (int v = 1; v < order; ++v) {
    for (int u = 0; u < v; ++u, ++bit) {
      if ((mask >> bit) & 1u) g.add_edge(u, v);
    }
  }
  return g;
}

const GraphClass& find_class(const std::vector<GraphClass>& classes, int edges) {
  for (const auto& c : classes) {
    if (c.canonical.edge_count() == edges) return c;
  }
  throw std::logic_error("no class with that edge count");
}

}  // namespace

TEST(SmallGraph, BitStringRoundTrip) {
  const SmallGraph p3(3, {{0, 1}, {1, 2}});
  EXPECT_EQ(p3.bit_string(), "101");
  EXPECT_EQ(SmallGraph::from_bit_string(3, "101"), p3);
  EXPECT_EQ(SmallGraph::from_code(3, p3.code()), p3);
  EXPECT_EQ(p3.degree(1), 2);
  EXPECT_EQ(p3.dominating_count(), 1);
  EXPECT_TRUE(p3.connected());
}

TEST(CanonicalForm, SmallExamples) {
  const SmallGraph edge(2, {{0, 1}});
  EXPECT_EQ(canonical_form(edge), edge);
  EXPECT_EQ(canonical_form(SmallGraph(3, {{0, 1}, {1, 2}})), canonical_form(SmallGraph(3, {{1, 0}, {0, 2}})));
  EXPECT_NE(canonical_form(SmallGraph(3, {{0, 1}, {1, 2}})), canonical_form(SmallGraph(3, {{0, 1}, {1, 2}, {0, 2}})));
}

TEST(CanonicalForm, FourVertexGraphsWithDominatingVertex) {
  std::set<SmallGraph> classes;
  int labelled_count = 0;
  for (std::uint32_t mask = 0; mask < 64; ++mask) {
    const SmallGraph g = labelled(4, mask);
    bool dominated = false;
    for (int v = 0; v < 4; ++v) dominated = dominated || g.degree(v) == 3;
    if (!dominated) continue;
    ++labelled_count;
    classes.insert(canonical_form(g));
  }
  EXPECT_GT(labelled_count, 0);
  EXPECT_EQ(classes.size(), 4u);
}

TEST(CanonicalForm, AgreesWithPermutationOracle) {
  for (int order = 2; order <= 5; ++order) {
    const int pairs = SmallGraph::pair_count(order);
    std::set<SmallGraph> classes;
    for (std::uint32_t mask = 0; mask < (1u << pairs); ++mask) {
      const SmallGraph g = labelled(order, mask);
      const SmallGraph c = canonical_form(g);
      ASSERT_TRUE(oracle::isomorphic(g, c));
      ASSERT_EQ(canonical_form(c), c);
      classes.insert(c);
    }
    const std::size_t expected[] = {0, 0, 2, 4, 11, 34};
    EXPECT_EQ(classes.size(), expected[order]);
  }
  std::mt19937_64 eng(1);
  for (int t = 0; t < 3000; ++t) {
    const SmallGraph a = labelled(5, static_cast<std::uint32_t>(eng() % 1024));
    const SmallGraph b = labelled(5, static_cast<std::uint32_t>(eng() % 1024));
    ASSERT_EQ(canonical_form(a) == canonical_form(b), oracle::isomorphic(a, b));
  }
}

TEST(IsomorphismClassifier, TableAndMemoAgree) {
  for (int k : {3, 6}) {
    const auto classes = enumerate_candidates(k);
    std::vector<SmallGraph> targets;
    for (const auto& c : classes) targets.push_back(c.canonical);
    IsomorphismClassifier classifier(targets, k + 1);
    std::mt19937_64 eng(k);
    for (int t = 0; t < 2000; ++t) {
      const SmallGraph g = labelled(k + 1, static_cast<std::uint32_t>(eng()) & ((1u << SmallGraph::pair_count(k + 1)) - 1));
      const int got = classifier.classify(g);
      const SmallGraph c = canonical_form(g);
      int expect = -1;
      for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] == c) expect = static_cast<int>(i);
      }
      ASSERT_EQ(got, expect);
    }
  }
}

TEST(InducedClaw, Detection) {
  EXPECT_TRUE(has_induced_claw(SmallGraph(4, {{0, 1}, {0, 2}, {0, 3}})));
  EXPECT_FALSE(has_induced_claw(SmallGraph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}})));
}

TEST(EnumerateCandidates, SmallK) {
  const auto k1 = enumerate_candidates(1);
  ASSERT_EQ(k1.size(), 1u);
  EXPECT_EQ(k1[0].q, 2);

  const auto k2 = enumerate_candidates(2);
  ASSERT_EQ(k2.size(), 2u);
  EXPECT_EQ(find_class(k2, 2).q, 1);
  EXPECT_EQ(find_class(k2, 3).q, 3);

  const auto k3 = enumerate_candidates(3);
  ASSERT_EQ(k3.size(), 4u);
  std::multiset<std::pair<int, int>> edges_q;
  for (const auto& c : k3) edges_q.insert({c.canonical.edge_count(), c.q});
  EXPECT_EQ(edges_q, (std::multiset<std::pair<int, int>>{{3, 1}, {4, 1}, {5, 2}, {6, 4}}));
  for (const auto& c : k3) EXPECT_TRUE(c.canonical.connected());
  EXPECT_THROW(enumerate_candidates(8), std::invalid_argument);
}

TEST(EstimateMu, OneDimensionalClosedForms) {
  const Density f = Density::uniform_cube(1);
  const auto k1 = enumerate_candidates(1);
  const MuEstimate k2 = estimate_mu(k1[0], 1, Norm::Euclidean, f, std::nullopt, 200000, 1);
  EXPECT_NEAR(k2.mu, 1.0, 3 * k2.se + 1e-12);
  EXPECT_EQ(k2.feasible, Feasibility::Yes);

  const auto cls2 = enumerate_candidates(2);
  const MuEstimate k3 = estimate_mu(find_class(cls2, 3), 1, Norm::Euclidean, f, std::nullopt, 400000, 2);
  EXPECT_NEAR(k3.mu, 0.5, 3 * k3.se);
  const MuEstimate p3 = estimate_mu(find_class(cls2, 2), 1, Norm::Euclidean, f, std::nullopt, 400000, 3);
  EXPECT_NEAR(p3.mu, 0.5, 3 * p3.se);

  const auto cls3 = enumerate_candidates(3);
  const MuEstimate claw = estimate_mu(find_class(cls3, 3), 1, Norm::Euclidean, f, std::nullopt, 400000, 4);
  EXPECT_EQ(claw.mu, 0.0);
  EXPECT_EQ(claw.feasible, Feasibility::No);
}

TEST(EstimateMu, QuadratureOracle) {
  const auto cls2 = enumerate_candidates(2);
  for (int edges : {2, 3}) {
    const double oracle_integral = oracle::three_vertex_integral_d1(edges, 801);
    EXPECT_NEAR(oracle_integral, 3.0, 0.02);
    EXPECT_NEAR(mu_integral_quadrature(find_class(cls2, edges).canonical, 1, Norm::Euclidean, 801), oracle_integral,
                1e-9);
  }
}

TEST(EstimateMu, WorkerCountDoesNotChangeResult) {
  const auto cls = enumerate_candidates(3);
  const Density f = Density::uniform_cube(2);
  const auto a = estimate_mu_all(cls, 2, Norm::Euclidean, f, std::nullopt, 300000, 9, 1);
  const auto b = estimate_mu_all(cls, 2, Norm::Euclidean, f, std::nullopt, 300000, 9, 3);
  for (std::size_t i = 0; i < cls.size(); ++i) EXPECT_EQ(a[i].mu, b[i].mu);
}

TEST(EstimateMu, StandardErrorScaling) {
  const auto cls = enumerate_candidates(2);
  const Density f = Density::uniform_cube(2);
  const auto a = estimate_mu(cls[0], 2, Norm::Euclidean, f, std::nullopt, 250000, 1);
  const auto b = estimate_mu(cls[0], 2, Norm::Euclidean, f, std::nullopt, 1000000, 2);
  EXPECT_NEAR(a.se / b.se, 2.0, 0.05);
}

TEST(EstimateMu, RegionScalesByDensityMass) {
  const auto cls = enumerate_candidates(1);
  const Density f = Density::uniform_cube(2);
  const Box half{Eigen::Vector2d(-0.5, -0.5), Eigen::Vector2d(0.0, 0.5)};
  const auto full = estimate_mu(cls[0], 2, Norm::Euclidean, f, std::nullopt, 100000, 1);
  const auto part = estimate_mu(cls[0], 2, Norm::Euclidean, f, half, 100000, 1);
  EXPECT_NEAR(part.mu, 0.5 * full.mu, 1e-12);
  EXPECT_NEAR(full.mu, M_PI / 2.0, 1e-12);
}

TEST(ConfigurationRadius, ClassIndicatorVanishesOutside) {
  std::mt19937_64 eng(4);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int k : {2, 3}) {
    const auto classes = enumerate_candidates(k);
    for (Norm norm : {Norm::Euclidean, Norm::MaxCoordinate, Norm::SumAbs}) {
      PointMatrix others(2, k);
      int probes = 0;
      while (probes < 100000) {
        for (int l = 0; l < k; ++l) others(0, l) = u(eng), others(1, l) = u(eng);
        double far = 0.0;
        for (int l = 0; l < k; ++l) far = std::max(far, norm_of(others.col(l), norm));
        if (far <= configuration_radius(k)) continue;
        ++probes;
        for (const auto& c : classes) ASSERT_FALSE(configuration_matches(others, norm, c.canonical));
      }
    }
  }
}

TEST(Atlas, LambdaAndWeightLaw) {
  const Density f = Density::uniform_cube(1);
  const Atlas a1 = build_atlas(1, 1, Norm::Euclidean, f, 100000, 1);
  EXPECT_EQ(lambda_x0(a1, 0.0), 0.0);
  EXPECT_NEAR(lambda_x0(a1, 1.0), 1.0, 1e-12);
  const WeightLaw w1 = weight_law(a1);
  ASSERT_EQ(w1.atoms.size(), 1u);
  EXPECT_EQ(w1.atoms[0].first, 2);
  EXPECT_EQ(w1.atoms[0].second, 1.0);

  const Atlas a2 = build_atlas(2, 1, Norm::Euclidean, f, 1000000, 2);
  // (1/6) (I_P3 + I_K3) with both integrals equal to 3.
  EXPECT_NEAR(lambda_x0(a2, 1.0), 1.0, 4 * a2.mu_dk_se);
  const WeightLaw w2 = weight_law(a2);
  double total = 0.0;
  for (const auto& [q, p] : w2.atoms) total += p;
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_NEAR(w2.mean(), 2.0, 0.01);

  double mu = 0.0;
  for (const auto& c : a2.classes) mu += c.mu;
  EXPECT_EQ(mu, a2.mu_dk);
}

TEST(Atlas, MultiplicityMeanUnderSampling) {
  const Atlas a = build_atlas(2, 1, Norm::Euclidean, Density::uniform_cube(1), 1000000, 3);
  const WeightLaw w = weight_law(a);
  double mu_p3 = 0.0, mu_k3 = 0.0;
  for (const auto& c : a.classes) (c.q == 1 ? mu_p3 : mu_k3) = c.mu;
  const double expect = (mu_p3 + 3 * mu_k3) / a.mu_dk;
  const int draws = 100000;
  double sum = 0.0, sum2 = 0.0;
  RngStream rng(1, 0);
  for (int i = 0; i < draws; ++i) {
    const double z = w.draw(rng);
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / draws;
  const double sd = std::sqrt((sum2 / draws - mean * mean) / draws);
  EXPECT_NEAR(mean, expect, 3 * sd);
}

TEST(Atlas, DegenerateLaws) {
  Atlas a;
  a.k = 2;
  a.classes = enumerate_candidates(2);
  EXPECT_THROW(weight_law(a), std::invalid_argument);
  a.classes[0].mu = 0.3;
  const WeightLaw w = weight_law(a);
  ASSERT_EQ(w.atoms.size(), 1u);
  EXPECT_EQ(w.atoms[0].second, 1.0);
}

TEST(Atlas, CacheRoundTrip) {
  const Atlas a = build_atlas(3, 2, Norm::MaxCoordinate, Density::uniform_cube(2), 100000, 5);
  std::stringstream ss;
  save_atlas(ss, a);
  const Atlas b = load_atlas(ss);
  ASSERT_EQ(b.classes.size(), a.classes.size());
  for (std::size_t i = 0; i < a.classes.size(); ++i) {
    EXPECT_EQ(b.classes[i].canonical, a.classes[i].canonical);
    EXPECT_EQ(b.classes[i].q, a.classes[i].q);
    EXPECT_EQ(b.classes[i].mu, a.classes[i].mu);
  }
  EXPECT_EQ(b.mu_dk, a.mu_dk);
  EXPECT_EQ(b.norm, Norm::MaxCoordinate);
}
