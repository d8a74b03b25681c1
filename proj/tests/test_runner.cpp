#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "rgg/runner.hpp"
#include "rgg/sampling.hpp"
#include "rgg/stats.hpp"

using namespace rgg;
namespace fs = std::filesystem;

namespace {

std::string scratch(const std::string& name) {
  const fs::path p = fs::path(testing::TempDir()) / ("rgg_runner_" + name);
  fs::remove_all(p);
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small(ExperimentKind kind, const std::string& out) {
  ExperimentConfig c;
  c.kind = kind;
  c.out_dir = out;
  c.replicates = 6;
  c.mu_samples = 20000;
  c.master_seed = 11;
  return c;
}

}  // namespace

TEST(Config, ParsesFileAndOverrides) {
  std::istringstream in(
      "# comment\n"
      "[run]\n"
      "kind = phi_fixed_k\n"
      "d = 1 ; trailing\n"
      "norm = l1\n"
      "n = 100,1000\n"
      "k = 2\n"
      "beta = 0.5\n"
      "seed = 42\n");
  ExperimentConfig c = load_config(in);
  EXPECT_EQ(c.kind, ExperimentKind::PhiFixedK);
  EXPECT_EQ(c.d, 1);
  EXPECT_EQ(c.norm, Norm::SumAbs);
  EXPECT_EQ(c.n_grid, (std::vector<Index>{100, 1000}));
  EXPECT_EQ(c.k, 2);
  EXPECT_EQ(c.beta, 0.5);
  EXPECT_EQ(c.master_seed, 42u);
  c.set("n_geometric", "10,10,3");
  EXPECT_EQ(c.n_grid, (std::vector<Index>{10, 100, 1000}));
  c.set("k_n_rule", "pow:0.5");
  EXPECT_EQ(c.kn_rule.kind, KnRule::Kind::LogPower);
  EXPECT_THROW(c.set("colour", "red"), std::invalid_argument);
  EXPECT_THROW(c.set("d", "two"), std::invalid_argument);
  EXPECT_EQ(parse_experiment_kind("gumbel"), ExperimentKind::ThresholdGumbel);
  EXPECT_EQ(parse_experiment_kind("threshold_gumbel"), ExperimentKind::ThresholdGumbel);
  EXPECT_THROW(parse_experiment_kind("frechet"), std::invalid_argument);
}

TEST(Config, Validation) {
  ExperimentConfig c;
  c.n_grid = {10};
  c.k = 10;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.k = 1;
  c.n_grid = {c.max_n + 1};
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Runner, WeibullSmokeMatchesOracle) {
  ExperimentConfig c = small(ExperimentKind::ThresholdWeibull, scratch("weibull"));
  c.d = 1;
  c.n_grid = {1000};
  c.replicates = 10;
  const ExperimentResult res = run_experiment(c);
  ASSERT_EQ(res.records.size(), 10u);
  const Density f = c.make_density();
  for (const auto& r : res.records) {
    RngStream rng(c.master_seed, r.seed);
    const PointMatrix p = sample_binomial(1000, f, rng).points;
    EXPECT_EQ(r.S_k, oracle::threshold_radius(p, 1, Norm::Euclidean));
    EXPECT_NEAR(r.statistic, -std::pow(1000.0, 2.0) * r.S_k, 1e-12 * std::abs(r.statistic));
    EXPECT_LT(r.statistic, 0.0);
  }
  const auto& entry = res.summary["results"][0];
  EXPECT_NEAR(entry["mu_dk"].get<double>(), 1.0, 0.02);
  EXPECT_EQ(entry["exponent"].get<int>(), 1);
}

TEST(Runner, DeterministicAcrossWorkers) {
  ExperimentConfig c = small(ExperimentKind::PhiFixedK, scratch("det_a"));
  c.d = 2;
  c.k = 2;
  c.n_grid = {500};
  const ExperimentResult a = run_experiment(c);
  write_outputs(a);
  c.workers = 3;
  c.out_dir = scratch("det_b");
  const ExperimentResult b = run_experiment(c);
  write_outputs(b);
  EXPECT_EQ(slurp(fs::path(a.config.out_dir) / "records.csv"), slurp(fs::path(b.config.out_dir) / "records.csv"));
  c.master_seed = 12;
  c.out_dir = scratch("det_c");
  write_outputs(run_experiment(c));
  EXPECT_NE(slurp(fs::path(a.config.out_dir) / "records.csv"), slurp(fs::path(c.out_dir) / "records.csv"));
}

TEST(Runner, NestedCloudsAcrossGrid) {
  ExperimentConfig c = small(ExperimentKind::ThresholdWeibull, scratch("nested"));
  c.n_grid = {200, 400};
  c.replicates = 4;
  const ExperimentResult res = run_experiment(c);
  ASSERT_EQ(res.records.size(), 8u);
  for (int i = 0; i < 4; ++i) EXPECT_LE(res.records[4 + i].S_k, res.records[i].S_k);
}

TEST(Runner, MuConstantsAgainstQuadrature) {
  ExperimentConfig c = small(ExperimentKind::MuConstants, scratch("mu"));
  c.d = 1;
  c.k = 2;
  c.mu_samples = 2'000'000;
  const ExperimentResult res = run_experiment(c);
  const auto& classes = res.summary["atlas"]["classes"];
  const auto& quad = res.summary["quadrature"];
  ASSERT_EQ(classes.size(), 2u);
  ASSERT_EQ(quad.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    const double mu = classes[i]["mu"].get<double>();
    const double se = classes[i]["se"].get<double>();
    EXPECT_NEAR(mu, 0.5, 3 * se);
    EXPECT_NEAR(mu, quad[i]["mu_quadrature"].get<double>(), 3 * se + 1e-3);
  }
}

TEST(Runner, PlotData) {
  const auto rows = emit_plot_data({0.5}, [](double x) { return std::clamp(x, 0.0, 1.0); });
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].ecdf, 0.0);
  EXPECT_EQ(rows[1].ecdf, 1.0);

  std::vector<double> v{0.1, 0.4, 0.4, 0.9, 0.35};
  auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  const auto plot = emit_plot_data(v, cdf);
  double gap = 0.0, prev = 0.0;
  for (const auto& row : plot) {
    gap = std::max({gap, std::abs(row.ecdf - row.cdf), std::abs(row.cdf - prev)});
    prev = row.ecdf;
  }
  EXPECT_DOUBLE_EQ(gap, ks_distance(EmpiricalSample(v), cdf));
  EXPECT_THROW(emit_plot_data({}, cdf), std::invalid_argument);
}

TEST(Runner, RecordsRoundTrip) {
  ExperimentConfig c = small(ExperimentKind::ThresholdGumbel, scratch("round"));
  c.n_grid = {2000};
  const ExperimentResult res = run_experiment(c);
  std::stringstream ss;
  write_records(ss, res.records);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), records_header());
  const auto back = read_records(ss);
  ASSERT_EQ(back.size(), res.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].S_k, res.records[i].S_k);
    EXPECT_EQ(back[i].statistic, res.records[i].statistic);
    EXPECT_EQ(back[i].W_k, res.records[i].W_k);
  }
}

TEST(Runner, AuditPassesForEveryKindAndCatchesEdits) {
  const ExperimentKind kinds[] = {ExperimentKind::ThresholdWeibull, ExperimentKind::ThresholdGumbel,
                                  ExperimentKind::PhiFixedK,        ExperimentKind::PhiGrowingK,
                                  ExperimentKind::Concentration,    ExperimentKind::MuConstants,
                                  ExperimentKind::PalmSuite,        ExperimentKind::ScheduleDump};
  for (ExperimentKind kind : kinds) {
    ExperimentConfig c = small(kind, scratch(std::string(command_name(kind))));
    c.n_grid = kind == ExperimentKind::PhiGrowingK || kind == ExperimentKind::ThresholdGumbel ||
                       kind == ExperimentKind::ScheduleDump
                   ? std::vector<Index>{20000}
                   : std::vector<Index>{800};
    c.lambda = 50.0;
    write_outputs(run_experiment(c));
    EXPECT_TRUE(audit_outputs(c.out_dir).empty()) << command_name(kind);
    EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "summary.json"));
  }

  ExperimentConfig c = small(ExperimentKind::ThresholdWeibull, scratch("tamper"));
  c.n_grid = {800};
  write_outputs(run_experiment(c));
  const fs::path rec = fs::path(c.out_dir) / "records.csv";
  std::string text = slurp(rec);
  const auto line2 = text.find('\n') + 1;
  text.replace(text.find(',', line2), 1, ",9");  // corrupt the n column of the first record
  std::ofstream(rec) << text;
  EXPECT_FALSE(audit_outputs(c.out_dir).empty());
}
