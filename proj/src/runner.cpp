#include "rgg/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rgg/graph.hpp"
#include "rgg/parallel.hpp"
#include "rgg/sampling.hpp"
#include "rgg/stats.hpp"

namespace rgg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct KindName {
  ExperimentKind kind;
  std::string_view config;
  std::string_view command;
};

constexpr KindName kKindNames[] = {
    {ExperimentKind::ThresholdWeibull, "threshold_weibull", "weibull"},
    {ExperimentKind::ThresholdGumbel, "threshold_gumbel", "gumbel"},
    {ExperimentKind::PhiFixedK, "phi_fixed_k", "phi-fixed"},
    {ExperimentKind::PhiGrowingK, "phi_growing_k", "phi-growing"},
    {ExperimentKind::Concentration, "max_degree_concentration", "concentration"},
    {ExperimentKind::MuConstants, "mu_constants", "mu"},
    {ExperimentKind::BoundsSuite, "bounds_suite", "bounds"},
    {ExperimentKind::PalmSuite, "palm_suite", "palm"},
    {ExperimentKind::ScheduleDump, "schedule_dump", "schedule-dump"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) throw std::invalid_argument("config: bad number for " + std::string(key) + ": '" + t + "'");
  return v;
}

std::int64_t parse_count(std::string_view key, std::string_view text) {
  const double v = parse_double(key, text);
  if (!(v >= 0.0) || v > 9e18 || v != std::floor(v))
    throw std::invalid_argument("config: expected a non-negative integer for " + std::string(key));
  return static_cast<std::int64_t>(v);
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw std::invalid_argument("config: expected a boolean for " + std::string(key));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_field(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return std::strtod(s.c_str(), nullptr);
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

bool is_replicate_kind(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::ThresholdWeibull:
    case ExperimentKind::ThresholdGumbel:
    case ExperimentKind::PhiFixedK:
    case ExperimentKind::PhiGrowingK:
    case ExperimentKind::Concentration:
      return true;
    default:
      return false;
  }
}

bool uses_growing_k(ExperimentKind kind) {
  return kind == ExperimentKind::ThresholdGumbel || kind == ExperimentKind::PhiGrowingK || kind == ExperimentKind::ScheduleDump;
}

std::map<std::string, std::string> config_entries(const ExperimentConfig& c) {
  std::map<std::string, std::string> m;
  m["kind"] = std::string(to_string(c.kind));
  m["d"] = std::to_string(c.d);
  m["norm"] = std::string(to_string(c.norm));
  m["density"] = c.density;
  std::string grid;
  for (std::size_t i = 0; i < c.n_grid.size(); ++i) grid += (i ? "," : "") + std::to_string(c.n_grid[i]);
  m["n"] = grid;
  m["k"] = std::to_string(c.k);
  m["k_n_rule"] = c.kn_rule.to_string();
  m["beta"] = fmt(c.beta);
  m["replicates"] = std::to_string(c.replicates);
  m["seed"] = std::to_string(c.master_seed);
  m["max_n"] = std::to_string(c.max_n);
  m["radius_exponent"] = fmt(c.radius_exponent);
  m["mu_samples"] = std::to_string(c.mu_samples);
  m["boxes"] = std::to_string(c.boxes);
  m["lambda"] = fmt(c.lambda);
  m["palm_radius"] = fmt(c.palm_radius);
  m["write_extremes"] = c.write_extremes ? "true" : "false";
  if (c.threshold) m["threshold"] = fmt(*c.threshold);
  return m;
}

// Per grid point: the degree parameter and the radius at which degrees are counted.
struct GridPoint {
  Index n = 0;
  int k = 0;
  double r = 0.0;
  GrowingRadius growing;
};

GridPoint grid_point(const ExperimentConfig& c, const Density& density, Index n) {
  GridPoint g;
  g.n = n;
  const double theta = unit_ball_volume(c.d, c.norm);
  switch (c.kind) {
    case ExperimentKind::ThresholdWeibull:
    case ExperimentKind::PhiFixedK:
      g.k = c.k;
      g.r = radius_fixed_k(static_cast<double>(n), c.k, c.d, c.beta);
      break;
    case ExperimentKind::ThresholdGumbel:
    case ExperimentKind::PhiGrowingK:
    case ExperimentKind::ScheduleDump:
      g.k = c.kn_rule(static_cast<double>(n));
      g.growing = radius_growing(static_cast<double>(n), g.k, c.d, theta, c.beta, density);
      g.r = g.growing.r;
      break;
    case ExperimentKind::Concentration:
      g.k = c.k;
      g.r = std::pow(static_cast<double>(n), -c.radius_exponent);
      break;
    default:
      break;
  }
  return g;
}

// Statistic columns as functions of the raw record fields only.
std::pair<double, double> record_statistics(const ExperimentConfig& c, const Density& density, const ReplicateRecord& rec) {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  if (std::isnan(rec.S_k)) return {kNaN, kNaN};
  const double n = static_cast<double>(rec.n);
  switch (c.kind) {
    case ExperimentKind::ThresholdWeibull: {
      const double dk = static_cast<double>(rec.d) * rec.k;
      return {-std::exp((rec.k + 1) * std::log(n) / dk) * rec.S_k, kNaN};
    }
    case ExperimentKind::ThresholdGumbel: {
      const double theta = unit_ball_volume(rec.d, rec.norm);
      bool warned = false;
      return {gumbel_statistic(rec.S_k, n, rec.k, rec.d, theta, density, GumbelVariant::Full),
              gumbel_statistic(rec.S_k, n, rec.k, rec.d, theta, density, GumbelVariant::Simplified, &warned)};
    }
    default:
      return {kNaN, kNaN};
  }
}

ReplicateRecord run_replicate(const ExperimentConfig& c, const Density& density, const GridPoint& g, std::uint64_t index) {
  RngStream rng(c.master_seed, index);
  const PointCloud cloud = sample_binomial(g.n, density, rng);
  ReplicateRecord rec;
  rec.seed = index;
  rec.n = g.n;
  rec.d = c.d;
  rec.norm = c.norm;
  rec.k = g.k;
  rec.r = g.r;
  rec.S_k = g.k < g.n ? threshold_radius(cloud.points, g.k, c.norm) : std::numeric_limits<double>::quiet_NaN();
  const DegreeProfile profile = degree_profile(cloud.points, g.r, c.norm);
  rec.max_degree = profile.max_degree;
  rec.W_k = profile.count(g.k);
  rec.W_km1 = profile.count(g.k - 1);
  const ExtremeTag tag = c.kind == ExperimentKind::Concentration ? ExtremeTag::maximum() : ExtremeTag::exact(g.k);
  ExtremeSet ext = extreme_points(cloud.points, profile, tag);
  rec.n_extreme = ext.size();
  rec.extremes = std::move(ext.coords);
  std::tie(rec.statistic, rec.statistic_alt) = record_statistics(c, density, rec);
  return rec;
}

std::vector<Box> slab_boxes(int d, int count) {
  std::vector<Box> boxes;
  for (int b = 0; b < count; ++b) {
    Box box;
    box.lo = Eigen::VectorXd::Constant(d, -0.5);
    box.hi = Eigen::VectorXd::Constant(d, 0.5);
    box.lo[0] = -0.5 + static_cast<double>(b) / count;
    box.hi[0] = b + 1 == count ? 0.5 : -0.5 + static_cast<double>(b + 1) / count;
    boxes.push_back(box);
  }
  return boxes;
}

json box_report_json(const BoxCountReport& rep) {
  json pairs = json::array();
  for (const auto& p : rep.pairs) pairs.push_back({{"a", p.a}, {"b", p.b}, {"correlation", p.correlation}, {"p_value", p.p_value}});
  return {{"tv", rep.tv}, {"max_tv", rep.max_tv}, {"max_abs_correlation", rep.max_abs_correlation},
          {"min_p_value", rep.min_p_value}, {"pairs", pairs}};
}

std::vector<std::int64_t> column(const std::vector<const ReplicateRecord*>& recs, Index ReplicateRecord::*field) {
  std::vector<std::int64_t> out;
  for (const auto* r : recs) out.push_back(r->*field);
  return out;
}

json summarize_records(const ExperimentConfig& c, const Density& density, const std::vector<ReplicateRecord>& records,
                       const std::optional<Atlas>& atlas) {
  const double thr = c.pass_threshold();
  json results = json::array();
  for (Index n : c.n_grid) {
    std::vector<const ReplicateRecord*> recs;
    for (const auto& r : records) {
      if (r.n == n) recs.push_back(&r);
    }
    if (recs.empty()) continue;
    const GridPoint g = grid_point(c, density, n);
    json entry = {{"n", n}, {"k", g.k}, {"r", g.r}, {"replicates", recs.size()},
                  {"seed_range", {recs.front()->seed, recs.back()->seed}}, {"threshold", thr}};
    switch (c.kind) {
      case ExperimentKind::ThresholdWeibull: {
        std::vector<double> v;
        for (const auto* r : recs) v.push_back(r->statistic);
        const WeibullLaw law{atlas->mu_dk, c.d * g.k};
        const double ks = ks_distance(EmpiricalSample(v), [&](double x) { return weibull_cdf(x, law); });
        entry["mu_dk"] = law.mu_dk;
        entry["exponent"] = law.exponent;
        entry["statistic"] = ks;
        entry["ks"] = ks;
        entry["pass"] = ks <= thr;
        break;
      }
      case ExperimentKind::ThresholdGumbel: {
        std::vector<double> full, simple, ratio;
        double max_diff = 0.0;
        const double theta = unit_ball_volume(c.d, c.norm);
        for (const auto* r : recs) {
          full.push_back(r->statistic);
          simple.push_back(r->statistic_alt);
          max_diff = std::max(max_diff, std::abs(r->statistic - r->statistic_alt));
          ratio.push_back(probability_limit_ratio(r->S_k, static_cast<double>(n), g.k, c.d, theta));
        }
        const double ks_full = ks_distance(EmpiricalSample(full), gumbel_cdf);
        const double ks_simple = ks_distance(EmpiricalSample(simple), gumbel_cdf);
        entry["k_n"] = g.k;
        entry["ntheta_r_d"] = g.growing.ntheta_r_d;
        entry["schedule_residual"] = g.growing.residual;
        entry["simplified_condition"] = simplified_condition(static_cast<double>(n), g.k);
        entry["ks_full"] = ks_full;
        entry["ks_simplified"] = ks_simple;
        entry["max_abs_full_minus_simplified"] = max_diff;
        entry["median_ratio"] = EmpiricalSample(ratio).median();
        entry["target_ratio"] = 1.0 / (density.f_max() * std::numbers::e);
        entry["statistic"] = ks_full;
        entry["pass"] = ks_full <= thr;
        break;
      }
      case ExperimentKind::PhiFixedK:
      case ExperimentKind::PhiGrowingK: {
        const auto wk = column(recs, &ReplicateRecord::W_k);
        std::int64_t above = 0;
        for (const auto* r : recs) above += r->max_degree > g.k ? 1 : 0;
        const double p_above = static_cast<double>(above) / static_cast<double>(recs.size());
        Pmf reference;
        std::vector<Pmf> box_refs;
        const auto boxes = slab_boxes(c.d, c.boxes);
        if (c.kind == ExperimentKind::PhiFixedK) {
          CompoundPoissonLaw law;
          for (const auto& cls : atlas->classes) law.atoms.emplace_back(cls.q, c.beta * cls.mu);
          reference = compound_poisson_pmf(law);
          const double whole = integrate_density_power(density, g.k + 1, std::nullopt);
          for (const auto& box : boxes) {
            const double frac = integrate_density_power(density, g.k + 1, box) / whole;
            CompoundPoissonLaw bl;
            for (const auto& cls : atlas->classes) bl.atoms.emplace_back(cls.q, c.beta * cls.mu * frac);
            box_refs.push_back(compound_poisson_pmf(bl));
          }
        } else {
          reference = poisson_pmf_table(c.beta);
          if (density.kind() == DensityKind::UniformCube) {
            for (const auto& box : boxes) box_refs.push_back(poisson_pmf_table(c.beta * box.volume()));
          }
        }
        const double tv = tv_distance(reference, wk);
        entry["tv_W_k"] = tv;
        entry["reference_mean"] = reference.mean();
        entry["empirical_mean"] = empirical_pmf(wk).mean();
        entry["p_degree_above_k"] = p_above;
        if (!box_refs.empty() && c.write_extremes) {
          std::vector<std::vector<std::int64_t>> counts;
          for (const auto* r : recs) counts.push_back(box_counts(r->extremes, boxes));
          entry["box_test"] = box_report_json(box_count_test(counts, box_refs));
        } else {
          entry["box_test"] = nullptr;
        }
        entry["statistic"] = tv;
        entry["pass"] = tv <= thr;
        break;
      }
      case ExperimentKind::Concentration: {
        std::map<Index, std::int64_t> hist;
        std::int64_t two_point = 0;
        for (const auto* r : recs) {
          ++hist[r->max_degree];
          two_point += (r->max_degree == g.k || r->max_degree == g.k - 1) ? 1 : 0;
        }
        const double p = static_cast<double>(two_point) / static_cast<double>(recs.size());
        json h = json::object();
        for (const auto& [deg, cnt] : hist) h[std::to_string(deg)] = cnt;
        Index best_low = 0;
        std::int64_t best = -1;
        for (const auto& [deg, cnt] : hist) {
          const auto next = hist.find(deg + 1);
          const std::int64_t pair = cnt + (next == hist.end() ? 0 : next->second);
          if (pair > best) best = pair, best_low = deg;
        }
        entry["max_degree_histogram"] = h;
        entry["best_pair"] = {best_low, best_low + 1};
        entry["p_best_pair"] = static_cast<double>(best) / static_cast<double>(recs.size());
        entry["p_two_point"] = p;
        entry["statistic"] = p;
        entry["pass"] = p >= thr;
        break;
      }
      default:
        break;
    }
    results.push_back(entry);
  }
  return results;
}

// ---- non-replicate experiments: each produces a table, summarised from its cells ----

double exact_binomial_tail(std::int64_t n, double p, std::int64_t k, bool upper) {
  std::vector<double> logs;
  for (std::int64_t m = upper ? k : 0; m <= (upper ? n : k); ++m) logs.push_back(log_binomial_pmf(n, p, m));
  if (logs.empty()) return 0.0;
  const double mx = *std::max_element(logs.begin(), logs.end());
  double s = 0.0;
  for (double l : logs) s += std::exp(l - mx);
  return std::min(1.0, std::exp(mx) * s);
}

double exact_poisson_tail(double lambda, std::int64_t k, bool upper) {
  if (!upper) {
    double s = 0.0;
    for (std::int64_t m = 0; m <= k; ++m) s += poisson_pmf(lambda, m);
    return std::min(1.0, s);
  }
  double s = 0.0;
  const std::int64_t start = std::max<std::int64_t>(k, 0);
  for (std::int64_t m = start;; ++m) {
    const double t = poisson_pmf(lambda, m);
    s += t;
    if (static_cast<double>(m) > lambda && t < 1e-300 + s * 1e-18) break;
  }
  return std::min(1.0, s);
}

void bounds_table(ExperimentResult& res) {
  res.table_header = {"kind", "n", "p", "lambda", "k", "exact", "bound", "holds"};
  auto add = [&](std::string kind, std::int64_t n, double p, double lambda, double k, double exact, double bound) {
    const bool holds = exact <= bound * (1.0 + 1e-12);
    res.table.push_back({std::move(kind), std::to_string(n), fmt(p), fmt(lambda), fmt(k), fmt(exact), fmt(bound),
                         holds ? "1" : "0"});
  };
  for (std::int64_t n = 1; n <= 50; ++n) {
    for (int pi = 1; pi <= 9; ++pi) {
      const double p = pi / 10.0;
      const double mean = static_cast<double>(n) * p;
      for (std::int64_t k = 0; k <= n; ++k) {
        TailParams tp{n, p, static_cast<double>(k), 0.0};
        if (static_cast<double>(k) >= mean)
          add("binomial_upper", n, p, 0, k, exact_binomial_tail(n, p, k, true), tail_bound(TailKind::BinomialUpper, tp));
        if (static_cast<double>(k) <= mean)
          add("binomial_lower", n, p, 0, k, exact_binomial_tail(n, p, k, false), tail_bound(TailKind::BinomialLower, tp));
      }
    }
  }
  for (double lambda : {0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 30.0, 50.0}) {
    for (std::int64_t k = 0; k <= 200; ++k) {
      TailParams tp{0, 0.0, static_cast<double>(k), lambda};
      if (static_cast<double>(k) >= lambda)
        add("poisson_upper", 0, 0, lambda, k, exact_poisson_tail(lambda, k, true), tail_bound(TailKind::PoissonUpper, tp));
      if (static_cast<double>(k) <= lambda)
        add("poisson_lower", 0, 0, lambda, k, exact_poisson_tail(lambda, k, false), tail_bound(TailKind::PoissonLower, tp));
    }
  }
  for (double lambda : {1e2, 1e3, 1e4}) {
    const double dev = 0.5 * std::pow(lambda, 0.75);
    TailParams tp{0, 0.0, 0.0, lambda};
    const auto hi = static_cast<std::int64_t>(std::ceil(lambda + dev));
    const auto lo = static_cast<std::int64_t>(std::floor(lambda - dev));
    add("poisson_34_upper", 0, 0, lambda, lambda + dev, exact_poisson_tail(lambda, hi, true),
        tail_bound(TailKind::Poisson34Upper, tp));
    add("poisson_34_lower", 0, 0, lambda, lambda - dev, exact_poisson_tail(lambda, lo, false),
        tail_bound(TailKind::Poisson34Lower, tp));
  }
}

void palm_table(const ExperimentConfig& c, const Density& density, ExperimentResult& res) {
  res.table_header = {"functional", "j", "lambda", "r", "lhs", "lhs_se", "rhs", "rhs_se"};
  PalmFunctional count{1, std::nullopt, c.norm, [](const PointMatrix&, const PointMatrix&) { return 1.0; }};
  const double r = c.palm_radius;
  const Norm norm = c.norm;
  PalmFunctional edge{2, r, c.norm, [r, norm](const PointMatrix& y, const PointMatrix&) {
                        return distance(y.col(0).data(), y.col(1).data(), static_cast<int>(y.rows()), norm) <= r ? 1.0 : 0.0;
                      }};
  const std::pair<std::string, PalmFunctional*> items[] = {{"count", &count}, {"edge", &edge}};
  std::uint64_t salt = 0;
  for (const auto& [name, h] : items) {
    const PalmEstimate e = palm_lhs_rhs(*h, c.lambda, density, c.replicates, c.master_seed + salt++, c.workers);
    res.table.push_back({name, std::to_string(h->j), fmt(c.lambda), h->locality ? fmt(r) : "nan", fmt(e.lhs), fmt(e.lhs_se),
                         fmt(e.rhs), fmt(e.rhs_se)});
  }
}

void schedule_table(const ExperimentConfig& c, const Density& density, ExperimentResult& res) {
  res.table_header = {"n", "k_n", "r_n", "ntheta_r_d", "residual"};
  for (Index n : c.n_grid) {
    const GridPoint g = grid_point(c, density, n);
    res.table.push_back({std::to_string(n), std::to_string(g.k), fmt(g.r), fmt(g.growing.ntheta_r_d), fmt(g.growing.residual)});
  }
}

Atlas atlas_from_config(const ExperimentConfig& c, const Density& density, int k) {
  if (!c.atlas_cache.empty() && fs::exists(c.atlas_cache)) {
    std::ifstream in(c.atlas_cache);
    Atlas a = load_atlas(in);
    if (a.k == k && a.d == c.d && a.norm == c.norm && a.density_tag == density.tag()) return a;
  }
  Atlas a = build_atlas(k, c.d, c.norm, density, c.mu_samples, c.master_seed ^ 0x9E3779B97F4A7C15ull, c.workers);
  if (!c.atlas_cache.empty()) {
    std::ofstream out(c.atlas_cache);
    save_atlas(out, a);
  }
  std::stringstream ss;
  save_atlas(ss, a);
  return load_atlas(ss);
}

void mu_table(const Atlas& atlas, ExperimentResult& res) {
  std::ostringstream os;
  save_atlas(os, atlas);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  res.table_header = split(line, ',');
  while (std::getline(is, line)) {
    if (!line.empty()) res.table.push_back(split(line, ','));
  }
}

json summarize_table(const ExperimentConfig& c, const std::vector<std::vector<std::string>>& table) {
  json out;
  switch (c.kind) {
    case ExperimentKind::MuConstants: {
      json classes = json::array();
      double mu_dk = 0.0;
      for (const auto& row : table) {
        const SmallGraph g = SmallGraph::from_bit_string(c.k + 1, row[0]);
        const double mu = parse_field(row[2]);
        const double se = parse_field(row[3]);
        mu_dk += mu;
        classes.push_back({{"bits", row[0]}, {"q", std::stoi(row[1])}, {"edges", g.edge_count()}, {"mu", mu}, {"se", se},
                           {"n_samples", std::stoll(row[4])},
                           {"feasible_by_se", mu > 5.0 * se}});
      }
      out = {{"classes", classes}, {"mu_dk", mu_dk}};
      break;
    }
    case ExperimentKind::BoundsSuite: {
      std::int64_t violations = 0;
      double worst = 0.0;
      for (const auto& row : table) {
        if (row[7] != "1") ++violations;
        const double bound = parse_field(row[6]);
        if (bound > 0.0) worst = std::max(worst, parse_field(row[5]) / bound);
      }
      out = {{"checks", table.size()}, {"violations", violations}, {"max_exact_over_bound", worst},
             {"statistic", violations}, {"threshold", 0}, {"pass", violations == 0}};
      break;
    }
    case ExperimentKind::PalmSuite: {
      json items = json::array();
      bool all = true;
      for (const auto& row : table) {
        const double lhs = parse_field(row[4]), lse = parse_field(row[5]);
        const double rhs = parse_field(row[6]), rse = parse_field(row[7]);
        const double combined = std::sqrt(lse * lse + rse * rse);
        const double z = combined > 0.0 ? std::abs(lhs - rhs) / combined : (lhs == rhs ? 0.0 : INFINITY);
        const bool pass = z <= 3.0;
        all = all && pass;
        items.push_back({{"functional", row[0]}, {"lhs", lhs}, {"lhs_se", lse}, {"rhs", rhs}, {"rhs_se", rse},
                         {"statistic", z}, {"threshold", 3.0}, {"pass", pass}, {"replicates", c.replicates}});
      }
      out = {{"functionals", items}, {"pass", all}};
      break;
    }
    case ExperimentKind::ScheduleDump: {
      double worst = 0.0;
      for (const auto& row : table) worst = std::max(worst, std::abs(parse_field(row[4])));
      out = {{"max_abs_residual", worst}, {"statistic", worst}, {"threshold", 1e-12}, {"pass", worst < 1e-12}};
      break;
    }
    default:
      break;
  }
  return out;
}

std::vector<std::string> read_csv_row(const std::string& line) { return split(line, ','); }

}  // namespace

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (const auto& k : kKindNames) {
    if (name == k.config || name == k.command) return k.kind;
  }
  throw std::invalid_argument("unknown experiment kind '" + std::string(name) + "'");
}

std::string_view to_string(ExperimentKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.config;
  }
  return "?";
}

std::string_view command_name(ExperimentKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.command;
  }
  return "?";
}

void ExperimentConfig::set(std::string_view key_in, std::string_view value) {
  const std::string key = trim(key_in);
  const std::string v = trim(value);
  if (key == "kind" || key == "experiment") {
    kind = parse_experiment_kind(v);
  } else if (key == "d") {
    d = static_cast<int>(parse_count(key, v));
  } else if (key == "norm") {
    norm = parse_norm(v);
  } else if (key == "density") {
    density = v;
  } else if (key == "n" || key == "n_grid") {
    n_grid.clear();
    for (const auto& item : split(v, ',')) n_grid.push_back(parse_count(key, item));
  } else if (key == "n_geometric") {
    const auto parts = split(v, ',');
    if (parts.size() != 3) throw std::invalid_argument("config: n_geometric expects start,factor,count");
    const double start = parse_double(key, parts[0]);
    const double factor = parse_double(key, parts[1]);
    const auto count = parse_count(key, parts[2]);
    n_grid.clear();
    double n = start;
    for (std::int64_t i = 0; i < count; ++i, n *= factor) n_grid.push_back(static_cast<Index>(std::llround(n)));
  } else if (key == "k") {
    k = static_cast<int>(parse_count(key, v));
  } else if (key == "k_n_rule" || key == "kn_rule") {
    kn_rule = KnRule::parse(v);
  } else if (key == "beta") {
    beta = parse_double(key, v);
  } else if (key == "replicates") {
    replicates = parse_count(key, v);
  } else if (key == "seed" || key == "master_seed") {
    std::uint64_t s = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("config: bad seed '" + v + "'");
    master_seed = s;
  } else if (key == "workers") {
    workers = static_cast<int>(parse_count(key, v));
  } else if (key == "out" || key == "out_dir") {
    out_dir = v;
  } else if (key == "max_n") {
    max_n = parse_count(key, v);
  } else if (key == "radius_exponent") {
    radius_exponent = parse_double(key, v);
  } else if (key == "mu_samples") {
    mu_samples = parse_count(key, v);
  } else if (key == "atlas_cache") {
    atlas_cache = v;
  } else if (key == "boxes") {
    boxes = static_cast<int>(parse_count(key, v));
  } else if (key == "lambda") {
    lambda = parse_double(key, v);
  } else if (key == "palm_radius" || key == "r") {
    palm_radius = parse_double(key, v);
  } else if (key == "write_extremes") {
    write_extremes = parse_bool(key, v);
  } else if (key == "threshold") {
    threshold = parse_double(key, v);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

void ExperimentConfig::validate() const {
  if (d < 1 || d > 8) throw std::invalid_argument("config: d must lie in [1, 8]");
  Density::parse(density, d);
  if (replicates < 1) throw std::invalid_argument("config: replicates must be >= 1");
  if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
  if (!(beta > 0.0)) throw std::invalid_argument("config: beta must be positive");
  if (boxes < 1) throw std::invalid_argument("config: boxes must be >= 1");
  if (n_grid.empty()) throw std::invalid_argument("config: empty n grid");
  for (Index n : n_grid) {
    if (n > max_n) throw std::invalid_argument("config: n = " + std::to_string(n) + " exceeds max_n = " + std::to_string(max_n));
    if (n < 2 && kind != ExperimentKind::BoundsSuite && kind != ExperimentKind::PalmSuite && kind != ExperimentKind::MuConstants)
      throw std::invalid_argument("config: n must be >= 2");
  }
  if (k < 1) throw std::invalid_argument("config: k must be >= 1");
  if (kind == ExperimentKind::MuConstants && k + 1 > SmallGraph::kMaxOrder)
    throw std::invalid_argument("config: k + 1 must not exceed 8");
  if ((kind == ExperimentKind::PhiFixedK || kind == ExperimentKind::ThresholdWeibull) && k + 1 > SmallGraph::kMaxOrder)
    throw std::invalid_argument("config: k + 1 must not exceed 8");
  if (kind == ExperimentKind::PalmSuite && (!(lambda > 0.0) || !(palm_radius > 0.0) || replicates < 2))
    throw std::invalid_argument("config: palm needs lambda > 0, r > 0 and at least 2 replicates");
  if (kind == ExperimentKind::Concentration && !(radius_exponent > 0.0))
    throw std::invalid_argument("config: radius_exponent must be positive");
  if (uses_growing_k(kind)) {
    for (Index n : n_grid) {
      if (kn_rule(static_cast<double>(n)) < 2) throw std::invalid_argument("config: k_n rule gives k_n < 2");
    }
  }
}

double ExperimentConfig::pass_threshold() const {
  if (threshold) return *threshold;
  switch (kind) {
    case ExperimentKind::ThresholdWeibull: return 0.05;
    case ExperimentKind::ThresholdGumbel: return 0.15;
    case ExperimentKind::PhiFixedK: return 0.05;
    case ExperimentKind::PhiGrowingK: return 0.1;
    case ExperimentKind::Concentration: return 0.9;
    default: return 0.0;
  }
}

ExperimentConfig load_config(std::istream& is, ExperimentConfig base) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto cut = line.find_first_of("#;");
    const std::string body = trim(line.substr(0, cut));
    if (body.empty() || body.front() == '[') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    base.set(body.substr(0, eq), body.substr(eq + 1));
  }
  return base;
}

std::string records_header() { return "seed,n,d,norm,k,r,S_k,max_degree,W_k,W_{k-1},n_extreme,statistic,statistic_alt"; }

void write_records(std::ostream& os, const std::vector<ReplicateRecord>& records) {
  os << records_header() << '\n';
  for (const auto& r : records) {
    os << r.seed << ',' << r.n << ',' << r.d << ',' << to_string(r.norm) << ',' << r.k << ',' << fmt(r.r) << ','
       << fmt(r.S_k) << ',' << r.max_degree << ',' << r.W_k << ',' << r.W_km1 << ',' << r.n_extreme << ','
       << fmt(r.statistic) << ',' << fmt(r.statistic_alt) << '\n';
  }
}

std::vector<ReplicateRecord> read_records(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != records_header()) throw std::runtime_error("read_records: unexpected header");
  std::vector<ReplicateRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = read_csv_row(line);
    if (f.size() != 13) throw std::runtime_error("read_records: malformed row: " + line);
    ReplicateRecord r;
    r.seed = std::stoull(f[0]);
    r.n = std::stoll(f[1]);
    r.d = std::stoi(f[2]);
    r.norm = parse_norm(f[3]);
    r.k = std::stoi(f[4]);
    r.r = parse_field(f[5]);
    r.S_k = parse_field(f[6]);
    r.max_degree = std::stoll(f[7]);
    r.W_k = std::stoll(f[8]);
    r.W_km1 = std::stoll(f[9]);
    r.n_extreme = std::stoll(f[10]);
    r.statistic = parse_field(f[11]);
    r.statistic_alt = parse_field(f[12]);
    r.extremes.resize(r.d, 0);
    out.push_back(std::move(r));
  }
  return out;
}

void write_extremes(std::ostream& os, const std::vector<ReplicateRecord>& records) {
  os << "seed,n,coords\n";
  for (const auto& r : records) {
    for (Index m = 0; m < r.extremes.cols(); ++m) {
      os << r.seed << ',' << r.n;
      for (Index a = 0; a < r.extremes.rows(); ++a) os << ',' << fmt(r.extremes(a, m));
      os << '\n';
    }
  }
}

void read_extremes(std::istream& is, std::vector<ReplicateRecord>& records) {
  std::string line;
  if (!std::getline(is, line) || line != "seed,n,coords") throw std::runtime_error("read_extremes: unexpected header");
  std::map<std::pair<std::uint64_t, Index>, std::vector<std::vector<double>>> pts;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = read_csv_row(line);
    if (f.size() < 3) throw std::runtime_error("read_extremes: malformed row: " + line);
    std::vector<double> x;
    for (std::size_t a = 2; a < f.size(); ++a) x.push_back(parse_field(f[a]));
    pts[{std::stoull(f[0]), std::stoll(f[1])}].push_back(std::move(x));
  }
  for (auto& r : records) {
    const auto it = pts.find({r.seed, r.n});
    const auto count = it == pts.end() ? 0 : static_cast<Index>(it->second.size());
    r.extremes.resize(r.d, count);
    for (Index m = 0; m < count; ++m) {
      if (static_cast<int>(it->second[m].size()) != r.d) throw std::runtime_error("read_extremes: dimension mismatch");
      for (int a = 0; a < r.d; ++a) r.extremes(a, m) = it->second[m][a];
    }
  }
}

std::vector<PlotRow> emit_plot_data(const std::vector<double>& values, const std::function<double(double)>& cdf) {
  if (values.empty()) throw std::invalid_argument("emit_plot_data: empty records");
  const EmpiricalSample sample(values);
  const auto& steps = sample.steps();
  const double lo = steps.front().first;
  const double span = steps.back().first - lo;
  const double pad = span > 0.0 ? 0.05 * span : std::max(1e-3, 0.05 * std::abs(lo));
  std::vector<PlotRow> out;
  out.push_back({lo - pad, 0.0, cdf(lo - pad)});
  for (const auto& [x, F] : steps) out.push_back({x, F, cdf(x)});
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult res;
  res.config = config;
  if (config.kind == ExperimentKind::PhiFixedK || config.kind == ExperimentKind::PhiGrowingK) res.config.write_extremes = true;
  const ExperimentConfig& c = res.config;
  const Density density = c.make_density();

  std::optional<Atlas> atlas;
  if (c.kind == ExperimentKind::ThresholdWeibull || c.kind == ExperimentKind::PhiFixedK || c.kind == ExperimentKind::MuConstants)
    atlas = atlas_from_config(c, density, c.k);

  res.summary["config"] = config_entries(c);
  if (is_replicate_kind(c.kind)) {
    for (Index n : c.n_grid) {
      const GridPoint g = grid_point(c, density, n);
      std::vector<ReplicateRecord> block(c.replicates);
      parallel_for(c.replicates, c.workers, [&](std::int64_t i) {
        block[i] = run_replicate(c, density, g, static_cast<std::uint64_t>(i));
      });
      for (auto& r : block) res.records.push_back(std::move(r));
    }
    res.summary["results"] = summarize_records(c, density, res.records, atlas);
  } else {
    switch (c.kind) {
      case ExperimentKind::MuConstants: mu_table(*atlas, res); break;
      case ExperimentKind::BoundsSuite: bounds_table(res); break;
      case ExperimentKind::PalmSuite: palm_table(c, density, res); break;
      case ExperimentKind::ScheduleDump: schedule_table(c, density, res); break;
      default: break;
    }
    res.summary["results"] = summarize_table(c, res.table);
    if (c.kind == ExperimentKind::MuConstants) {
      json quad = json::array();
      for (const auto& cls : atlas->classes) {
        if (c.d * c.k <= 3) {
          const int cells = c.d * c.k <= 2 ? 801 : 161;
          const double integral = mu_integral_quadrature(cls.canonical, c.d, c.norm, cells);
          quad.push_back({{"bits", cls.canonical.bit_string()},
                          {"mu_quadrature", integral * integrate_density_power(density, c.k + 1, std::nullopt) /
                                                std::tgamma(c.k + 2.0)}});
        }
      }
      res.summary["quadrature"] = quad;
    }
  }
  if (atlas) {
    json classes = json::array();
    for (const auto& cls : atlas->classes)
      classes.push_back({{"bits", cls.canonical.bit_string()}, {"q", cls.q}, {"mu", cls.mu}, {"se", cls.se},
                         {"feasible", std::string(to_string(cls.feasible))}});
    res.summary["atlas"] = {{"mu_dk", atlas->mu_dk}, {"mu_dk_se", atlas->mu_dk_se}, {"classes", classes}};
    std::ostringstream os;
    save_atlas(os, *atlas);
    res.summary["atlas_csv"] = os.str();
  }
  return res;
}

void write_outputs(const ExperimentResult& result) {
  const ExperimentConfig& c = result.config;
  fs::create_directories(c.out_dir);
  const fs::path dir(c.out_dir);
  {
    std::ofstream os(dir / "records.csv");
    if (is_replicate_kind(c.kind)) {
      write_records(os, result.records);
    } else {
      for (std::size_t i = 0; i < result.table_header.size(); ++i) os << (i ? "," : "") << result.table_header[i];
      os << '\n';
      for (const auto& row : result.table) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
      }
    }
  }
  if (c.write_extremes && is_replicate_kind(c.kind)) {
    std::ofstream os(dir / "extremes.csv");
    write_extremes(os, result.records);
  }
  if (result.summary.contains("atlas_csv")) {
    std::ofstream os(dir / "atlas.csv");
    os << result.summary["atlas_csv"].get<std::string>();
  }
  {
    json s = result.summary;
    s.erase("atlas_csv");
    std::ofstream os(dir / "summary.json");
    os << s.dump(2) << '\n';
  }

  if (c.kind == ExperimentKind::ThresholdWeibull || c.kind == ExperimentKind::ThresholdGumbel) {
    std::ofstream ecdf(dir / "plot_ecdf.csv");
    std::ofstream qq(dir / "plot_qq.csv");
    ecdf << "n,x,ecdf,cdf\n";
    qq << "n,empirical,theoretical\n";
    for (const auto& entry : result.summary["results"]) {
      const Index n = entry["n"].get<Index>();
      std::vector<double> v;
      for (const auto& r : result.records) {
        if (r.n == n) v.push_back(r.statistic);
      }
      std::function<double(double)> cdf;
      std::function<double(double)> quantile;
      if (c.kind == ExperimentKind::ThresholdWeibull) {
        const WeibullLaw law{entry["mu_dk"].get<double>(), entry["exponent"].get<int>()};
        cdf = [law](double x) { return weibull_cdf(x, law); };
        quantile = [law](double p) { return weibull_quantile(p, law); };
      } else {
        cdf = gumbel_cdf;
        quantile = gumbel_quantile;
      }
      for (const auto& row : emit_plot_data(v, cdf)) ecdf << n << ',' << fmt(row.x) << ',' << fmt(row.ecdf) << ',' << fmt(row.cdf) << '\n';
      std::sort(v.begin(), v.end());
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(v.size());
        qq << n << ',' << fmt(v[i]) << ',' << fmt(quantile(p)) << '\n';
      }
    }
  } else if (c.kind == ExperimentKind::PhiFixedK || c.kind == ExperimentKind::PhiGrowingK || c.kind == ExperimentKind::Concentration) {
    std::ofstream pmf(dir / "plot_pmf.csv");
    pmf << "n,value,empirical\n";
    for (Index n : c.n_grid) {
      std::vector<std::int64_t> v;
      for (const auto& r : result.records) {
        if (r.n == n) v.push_back(c.kind == ExperimentKind::Concentration ? r.max_degree : r.W_k);
      }
      if (v.empty()) continue;
      const Pmf e = empirical_pmf(v);
      for (std::size_t m = 0; m < e.p.size(); ++m) pmf << n << ',' << m << ',' << fmt(e.p[m]) << '\n';
    }
  }
}

std::vector<std::string> audit_outputs(const std::string& out_dir) {
  const fs::path dir(out_dir);
  std::ifstream sj(dir / "summary.json");
  if (!sj) throw std::runtime_error("audit: missing summary.json");
  const json summary = json::parse(sj);
  ExperimentConfig c;
  for (const auto& [key, value] : summary["config"].items()) c.set(key, value.get<std::string>());
  c.out_dir = out_dir;
  const Density density = c.make_density();
  std::vector<std::string> mismatches;

  std::optional<Atlas> atlas;
  if (fs::exists(dir / "atlas.csv")) {
    std::ifstream in(dir / "atlas.csv");
    atlas = load_atlas(in);
  }

  std::ifstream rc(dir / "records.csv");
  if (!rc) throw std::runtime_error("audit: missing records.csv");
  json recomputed;
  if (is_replicate_kind(c.kind)) {
    auto records = read_records(rc);
    if (c.write_extremes) {
      std::ifstream ex(dir / "extremes.csv");
      if (!ex) throw std::runtime_error("audit: missing extremes.csv");
      read_extremes(ex, records);
    }
    for (const auto& r : records) {
      if (c.write_extremes && r.extremes.cols() != r.n_extreme) {
        mismatches.push_back("extremes[" + std::to_string(r.seed) + "]");
      }
      const auto [s, alt] = record_statistics(c, density, r);
      if (!same(s, r.statistic) || !same(alt, r.statistic_alt)) mismatches.push_back("statistic[" + std::to_string(r.seed) + "]");
    }
    recomputed = summarize_records(c, density, records, atlas);
  } else {
    std::string line;
    std::getline(rc, line);
    std::vector<std::vector<std::string>> table;
    while (std::getline(rc, line)) {
      if (!line.empty()) table.push_back(split(line, ','));
    }
    recomputed = summarize_table(c, table);
  }
  if (recomputed != summary["results"]) {
    if (recomputed.is_array() && summary["results"].is_array() && recomputed.size() == summary["results"].size()) {
      for (std::size_t i = 0; i < recomputed.size(); ++i) {
        for (const auto& [key, value] : recomputed[i].items()) {
          if (!summary["results"][i].contains(key) || summary["results"][i][key] != value)
            mismatches.push_back("results[" + std::to_string(i) + "]." + key);
        }
      }
    }
    if (mismatches.empty()) mismatches.push_back("results");
  }
  return mismatches;
}

}  // namespace rgg
