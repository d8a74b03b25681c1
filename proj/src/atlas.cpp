#include "rgg/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rgg/parallel.hpp"

namespace rgg {

std::string_view to_string(Feasibility f) {
  switch (f) {
    case Feasibility::Yes: return "yes";
    case Feasibility::No: return "no";
    case Feasibility::Undetermined: return "undetermined";
  }
  return "?";
}

std::vector<GraphClass> enumerate_candidates(int k) {
  if (k < 1 || k + 1 > SmallGraph::kMaxOrder) throw std::invalid_argument("enumerate_candidates: need 1 <= k <= 7");

  // Isomorphism classes on m vertices, grown one vertex at a time: deleting the last
  // vertex of any graph on m vertices leaves a graph on m - 1 vertices.
  std::set<SmallGraph> layer{SmallGraph(1)};
  for (int m = 2; m <= k; ++m) {
    std::set<SmallGraph> next;
    for (const SmallGraph& g : layer) {
      for (std::uint32_t mask = 0; mask < (1u << (m - 1)); ++mask) {
        SmallGraph h(m);
        for (int a = 0; a < m - 1; ++a) {
          for (int b = a + 1; b < m - 1; ++b) {
            if (g.adjacent(a, b)) h.add_edge(a, b);
          }
          if ((mask >> a) & 1u) h.add_edge(a, m - 1);
        }
        next.insert(canonical_form(h));
      }
    }
    layer = std::move(next);
  }

  // Graphs with a dominating vertex are isomorphic iff they are isomorphic after
  // deleting one dominating vertex, so adjoining a dominating vertex to each class on
  // k vertices yields every class exactly once.
  std::set<SmallGraph> result;
  for (const SmallGraph& g : layer) {
    SmallGraph h(k + 1);
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        if (g.adjacent(a, b)) h.add_edge(a, b);
      }
      h.add_edge(a, k);
    }
    result.insert(canonical_form(h));
  }

  std::vector<GraphClass> out;
  for (const SmallGraph& g : result) {
    GraphClass cls;
    cls.canonical = g;
    cls.q = g.dominating_count();
    out.push_back(cls);
  }
  return out;
}

double configuration_radius(int k) { return k <= 1 ? 1.0 : 2.0; }

namespace {

// Adjacency code of the unit-radius graph on {0, x_1, ..., x_{j-1}} in the bit order of
// SmallGraph::code(): vertex 0 is the origin, vertex l the l-th column.
std::uint32_t configuration_code(const PointMatrix& others, Norm norm) {
  const int d = static_cast<int>(others.rows());
  const int m = static_cast<int>(others.cols());
  std::uint32_t code = 0;
  for (int v = 1; v <= m; ++v) {
    const double* xv = others.col(v - 1).data();
    code = (code << 1) | static_cast<std::uint32_t>(norm_of(others.col(v - 1), norm) <= 1.0);
    for (int u = 1; u < v; ++u) {
      code = (code << 1) | static_cast<std::uint32_t>(distance(others.col(u - 1).data(), xv, d, norm) <= 1.0);
    }
  }
  return code;
}

double integrate_on_box(const std::function<double(const double*)>& fn, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi, int cells) {
  const int d = static_cast<int>(lo.size());
  const Eigen::VectorXd h = (hi - lo) / cells;
  std::vector<int> idx(d, 0);
  std::vector<double> x(d);
  double sum = 0.0;
  while (true) {
    for (int a = 0; a < d; ++a) x[a] = lo[a] + (idx[a] + 0.5) * h[a];
    sum += fn(x.data());
    int a = 0;
    while (a < d && ++idx[a] == cells) {
      idx[a] = 0;
      ++a;
    }
    if (a == d) break;
  }
  return sum * h.prod();
}

}  // namespace

bool configuration_matches(const PointMatrix& others, Norm norm, const SmallGraph& target) {
  if (others.cols() + 1 != target.order()) return false;
  const auto g = SmallGraph::from_code(target.order(), configuration_code(others, norm));
  return canonical_form(g) == target;
}

double integrate_density_power(const Density& density, int j, const std::optional<Box>& region) {
  const int d = density.dim();
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(d, -0.5);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(d, 0.5);
  if (region) {
    if (region->dim() != d) throw std::invalid_argument("integrate_density_power: region dimension mismatch");
    lo = lo.cwiseMax(region->lo);
    hi = hi.cwiseMin(region->hi);
    if ((hi.array() <= lo.array()).any()) return 0.0;
  }
  if (density.kind() == DensityKind::UniformCube) return (hi - lo).prod();
  const auto fn = [&](const double* x) { return std::pow(density(x), j); };
  int cells = static_cast<int>(std::ceil(std::pow(1e6, 1.0 / d)));
  cells += cells % 2;
  const double coarse = integrate_on_box(fn, lo, hi, cells);
  const double fine = integrate_on_box(fn, lo, hi, 2 * cells);
  return (4.0 * fine - coarse) / 3.0;
}

std::vector<MuEstimate> estimate_mu_all(const std::vector<GraphClass>& classes, int d, Norm norm,
                                        const Density& density, const std::optional<Box>& region,
                                        std::int64_t n_samples, std::uint64_t master_seed, int workers) {
  if (classes.empty()) return {};
  if (n_samples < 1) throw std::invalid_argument("estimate_mu: n_samples must be positive");
  if (density.dim() != d) throw std::invalid_argument("estimate_mu: density dimension mismatch");
  const int j = classes.front().canonical.order();
  for (const auto& c : classes) {
    if (c.canonical.order() != j) throw std::invalid_argument("estimate_mu: classes must share their order");
  }
  const int k = j - 1;
  const double radius = configuration_radius(k);
  const double ball = unit_ball_volume(d, norm) * std::pow(radius, d);

  constexpr std::int64_t kBatch = 1 << 17;
  const std::int64_t batches = (n_samples + kBatch - 1) / kBatch;
  std::vector<std::vector<std::int64_t>> hits(batches, std::vector<std::int64_t>(classes.size(), 0));
  std::vector<SmallGraph> targets;
  for (const auto& c : classes) targets.push_back(c.canonical);
  const IsomorphismClassifier prototype(targets, j);
  parallel_for(batches, workers, [&](std::int64_t b) {
    IsomorphismClassifier classifier = prototype;
    RngStream rng(master_seed, static_cast<std::uint64_t>(b));
    PointMatrix others(d, k);
    const std::int64_t count = std::min(kBatch, n_samples - b * kBatch);
    for (std::int64_t s = 0; s < count; ++s) {
      for (int l = 0; l < k; ++l) sample_uniform_ball(d, norm, radius, rng.engine(), others.col(l).data());
      const int cls = classifier.classify(configuration_code(others, norm));
      if (cls >= 0) ++hits[b][cls];
    }
  });

  const double volume = std::pow(ball, k);
  const double density_factor = integrate_density_power(density, j, region) / std::tgamma(j + 1.0);
  const double n = static_cast<double>(n_samples);
  std::vector<MuEstimate> out(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::int64_t h = 0;
    for (const auto& batch : hits) h += batch[c];
    const double p = h / n;
    const double var = n > 1 ? p * (1.0 - p) * n / (n - 1.0) : 0.0;
    MuEstimate& e = out[c];
    e.n_samples = n_samples;
    e.integral = volume * p;
    e.integral_se = volume * std::sqrt(var / n);
    e.mu = e.integral * density_factor;
    e.se = e.integral_se * density_factor;
    if (d == 1 && has_induced_claw(classes[c].canonical)) {
      e.feasible = Feasibility::No;
    } else if (e.integral > 5.0 * e.integral_se) {
      e.feasible = Feasibility::Yes;
    } else if (h == 0 && n_samples >= 10'000'000) {
      e.feasible = Feasibility::No;
    } else {
      e.feasible = Feasibility::Undetermined;
    }
  }
  return out;
}

MuEstimate estimate_mu(const GraphClass& cls, int d, Norm norm, const Density& density,
                       const std::optional<Box>& region, std::int64_t n_samples, std::uint64_t master_seed,
                       int workers) {
  return estimate_mu_all({cls}, d, norm, density, region, n_samples, master_seed, workers).front();
}

double mu_integral_quadrature(const SmallGraph& canonical, int d, Norm norm, int cells) {
  const int k = canonical.order() - 1;
  if (k < 1) throw std::invalid_argument("mu_integral_quadrature: graph needs at least two vertices");
  const int dims = d * k;
  const double radius = configuration_radius(k);
  const double h = 2.0 * radius / cells;
  PointMatrix others(d, k);
  std::vector<int> idx(dims, 0);
  std::int64_t hits = 0;
  while (true) {
    for (int t = 0; t < dims; ++t) others(t % d, t / d) = -radius + (idx[t] + 0.5) * h;
    if (configuration_matches(others, norm, canonical)) ++hits;
    int t = 0;
    while (t < dims && ++idx[t] == cells) {
      idx[t] = 0;
      ++t;
    }
    if (t == dims) break;
  }
  return static_cast<double>(hits) * std::pow(h, dims);
}

Atlas build_atlas(int k, int d, Norm norm, const Density& density, std::int64_t n_samples,
                  std::uint64_t master_seed, int workers) {
  Atlas atlas;
  atlas.k = k;
  atlas.d = d;
  atlas.norm = norm;
  atlas.density_tag = density.tag();
  atlas.classes = enumerate_candidates(k);
  const auto est = estimate_mu_all(atlas.classes, d, norm, density, std::nullopt, n_samples, master_seed, workers);
  double var = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    GraphClass& c = atlas.classes[i];
    c.mu = est[i].mu;
    c.se = est[i].se;
    c.integral = est[i].integral;
    c.integral_se = est[i].integral_se;
    c.n_samples = est[i].n_samples;
    c.feasible = est[i].feasible;
    atlas.mu_dk += c.mu;
    var += c.se * c.se;
  }
  atlas.mu_dk_se = std::sqrt(var);
  return atlas;
}

double lambda_x0(const Atlas& atlas, double f_at_x0) {
  if (!(f_at_x0 >= 0.0)) throw std::invalid_argument("lambda_x0: density value must be >= 0");
  if (f_at_x0 == 0.0) return 0.0;
  double total = 0.0;
  for (const auto& c : atlas.classes) total += c.integral;
  return std::pow(f_at_x0, atlas.k + 1) / std::tgamma(atlas.k + 2.0) * total;
}

WeightLaw weight_law(const Atlas& atlas) {
  std::map<int, double> by_q;
  double total = 0.0;
  for (const auto& c : atlas.classes) {
    if (c.mu > 0.0) {
      by_q[c.q] += c.mu;
      total += c.mu;
    }
  }
  if (!(total > 0.0)) throw std::invalid_argument("weight_law: every class has zero weight");
  WeightLaw law;
  for (const auto& [q, m] : by_q) law.atoms.emplace_back(q, m / total);
  return law;
}

void save_atlas(std::ostream& os, const Atlas& atlas) {
  os << "bits,q,mu,se,n_samples,d,norm,k,density\n" << std::setprecision(17);
  for (const auto& c : atlas.classes) {
    os << c.canonical.bit_string() << ',' << c.q << ',' << c.mu << ',' << c.se << ',' << c.n_samples << ','
       << atlas.d << ',' << to_string(atlas.norm) << ',' << atlas.k << ',' << atlas.density_tag << '\n';
  }
}

Atlas load_atlas(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "bits,q,mu,se,n_samples,d,norm,k,density")
    throw std::runtime_error("load_atlas: unexpected header");
  Atlas atlas;
  bool first = true;
  std::optional<Density> density;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream row(line);
    for (std::string item; std::getline(row, item, ',');) f.push_back(item);
    if (f.size() != 9) throw std::runtime_error("load_atlas: malformed record: " + line);
    const int d = std::stoi(f[5]);
    const Norm norm = parse_norm(f[6]);
    const int k = std::stoi(f[7]);
    if (first) {
      atlas.d = d;
      atlas.norm = norm;
      atlas.k = k;
      atlas.density_tag = f[8];
      density = Density::parse(f[8], d);
      first = false;
    } else if (d != atlas.d || norm != atlas.norm || k != atlas.k || f[8] != atlas.density_tag) {
      throw std::runtime_error("load_atlas: records disagree on (d, norm, k, density)");
    }
    GraphClass c;
    c.canonical = SmallGraph::from_bit_string(k + 1, f[0]);
    c.q = std::stoi(f[1]);
    c.mu = std::stod(f[2]);
    c.se = std::stod(f[3]);
    c.n_samples = std::stoll(f[4]);
    const double factor = integrate_density_power(*density, k + 1, std::nullopt) / std::tgamma(k + 2.0);
    c.integral = c.mu / factor;
    c.integral_se = c.se / factor;
    if (d == 1 && has_induced_claw(c.canonical)) {
      c.feasible = Feasibility::No;
    } else if (c.mu > 5.0 * c.se) {
      c.feasible = Feasibility::Yes;
    } else if (c.mu == 0.0 && c.n_samples >= 10'000'000) {
      c.feasible = Feasibility::No;
    }
    atlas.classes.push_back(c);
  }
  double var = 0.0;
  for (const auto& c : atlas.classes) {
    atlas.mu_dk += c.mu;
    var += c.se * c.se;
  }
  atlas.mu_dk_se = std::sqrt(var);
  return atlas;
}

}  // namespace rgg
