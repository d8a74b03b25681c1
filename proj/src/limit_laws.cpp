#include "rgg/limit_laws.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rgg/atlas.hpp"
#include "rgg/parallel.hpp"

namespace rgg {

double weibull_cdf(double x, const WeibullLaw& law) {
  if (x >= 0.0) return 1.0;
  return std::exp(-law.mu_dk * std::pow(-x, law.exponent));
}

double weibull_quantile(double p, const WeibullLaw& law) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("weibull_quantile: p must lie in (0, 1)");
  return -std::pow(-std::log(p) / law.mu_dk, 1.0 / law.exponent);
}

double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

double gumbel_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("gumbel_quantile: p must lie in (0, 1)");
  return -std::log(-std::log(p));
}

double lambert_w0(double t) {
  constexpr double kBranch = -1.0 / std::numbers::e;
  if (std::isnan(t)) throw std::domain_error("lambert_w0: NaN argument");
  if (t < kBranch) {
    // Allow the rounding of -1/e itself.
    if (t < kBranch * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()))
      throw std::domain_error("lambert_w0: argument below -1/e");
    return -1.0;
  }
  if (t == 0.0) return 0.0;
  if (std::isinf(t)) return t;

  double w;
  const double p2 = 2.0 * (std::numbers::e * t + 1.0);
  if (t < -0.25) {
    const double p = std::sqrt(std::max(p2, 0.0));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    if (p < 1e-4) return w;
  } else if (t < 3.0) {
    w = std::log1p(t);
  } else {
    const double l1 = std::log(t);
    w = l1 - std::log(l1);
  }

  for (int it = 0; it < 64; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - t;
    const double wp1 = w + 1.0;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    const double next = w - step;
    if (!std::isfinite(next)) break;
    const bool done = std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(next));
    w = std::max(next, -1.0);
    if (done) break;
  }
  return w;
}

double radius_fixed_k(double n, int k, int d, double beta) {
  if (!(n > 0.0) || k < 1 || d < 1 || !(beta > 0.0)) throw std::invalid_argument("radius_fixed_k: arguments must be positive");
  return std::exp((std::log(beta) - (k + 1) * std::log(n)) / (static_cast<double>(d) * k));
}

GrowingRadius radius_growing(double n, int k_n, int d, double theta, double beta, const Density& density) {
  if (!(n > 0.0) || k_n < 1 || d < 1 || !(theta > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("radius_growing: arguments must be positive");
  if (density.dim() != d) throw std::invalid_argument("radius_growing: density dimension mismatch");
  const double k = k_n;
  const double f_max = density.f_max();

  // log of the amplitude A in (A / beta)^{-1/k}; beta_implied = A (e t)^k e^{-kt}.
  double log_amplitude = std::log(n) - 0.5 * std::log(2.0 * std::numbers::pi * k);
  if (density.kind() == DensityKind::RadialPeak) {
    const double s = density.exponent();
    log_amplitude += std::log(density.peak_constant()) + (1.0 + d / s) * std::log(f_max) - (d / s) * std::log(k);
  }
  const double arg = -std::exp(-1.0 - (log_amplitude - std::log(beta)) / k);
  if (arg < -1.0 / std::numbers::e)
    throw std::domain_error("radius_growing: W0 argument below -1/e (n too small for beta and k_n)");
  const double t = -lambert_w0(arg);  // n theta r^d f_max / k

  GrowingRadius out;
  out.ntheta_r_d = t * k / f_max;
  out.r = std::pow(out.ntheta_r_d / (n * theta), 1.0 / d);
  const double log_beta_implied = log_amplitude + k * (1.0 + std::log(t) - t);
  out.residual = log_beta_implied - std::log(beta);
  return out;
}

int k_n_log_over_loglog(double n) {
  if (!(n > std::numbers::e)) throw std::invalid_argument("k_n_log_over_loglog: need n > e");
  const double l = std::log(n);
  return std::max(1, static_cast<int>(std::ceil(l / std::log(l))));
}

int k_n_log_power(double n, double alpha) {
  if (!(n > 1.0)) throw std::invalid_argument("k_n_log_power: need n > 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("k_n_log_power: alpha must lie in (0, 1)");
  return std::max(1, static_cast<int>(std::ceil(std::pow(std::log(n), alpha))));
}

KnRule KnRule::parse(std::string_view text) {
  KnRule rule;
  if (text == "loglog") return rule;
  if (text.starts_with("pow:")) {
    rule.kind = Kind::LogPower;
    const std::string_view num = text.substr(4);
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), rule.alpha);
    if (ec != std::errc() || ptr != num.data() + num.size() || !(rule.alpha > 0.0 && rule.alpha < 1.0))
      throw std::invalid_argument("KnRule: bad exponent in '" + std::string(text) + "'");
    return rule;
  }
  throw std::invalid_argument("KnRule: expected 'loglog' or 'pow:<alpha>', got '" + std::string(text) + "'");
}

int KnRule::operator()(double n) const {
  return kind == Kind::LogOverLogLog ? k_n_log_over_loglog(n) : k_n_log_power(n, alpha);
}

std::string KnRule::to_string() const {
  if (kind == Kind::LogOverLogLog) return "loglog";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, alpha);
  return "pow:" + std::string(buf, res.ptr);
}

double log_binomial_pmf(std::int64_t n, double p, std::int64_t k) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (k < 0 || k > n) return kNegInf;
  if (p <= 0.0) return k == 0 ? 0.0 : kNegInf;
  if (p >= 1.0) return k == n ? 0.0 : kNegInf;
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) + kd * std::log(p) +
         (nd - kd) * std::log1p(-p);
}

double log_poisson_pmf(double lambda, std::int64_t k) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  if (lambda <= 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double kd = static_cast<double>(k);
  return kd * std::log(lambda) - lambda - std::lgamma(kd + 1.0);
}

double poisson_pmf(double lambda, std::int64_t k) { return std::exp(log_poisson_pmf(lambda, k)); }

namespace {

double overlap(double lo, double hi) { return std::max(0.0, std::min(hi, 0.5) - std::max(lo, -0.5)); }

// Integral of |y|^s over [a, b].
double abs_power_integral(double a, double b, double s) {
  auto prim = [s](double y) { return std::copysign(std::pow(std::abs(y), s + 1.0) / (s + 1.0), y); };
  return prim(b) - prim(a);
}

// Area of the planar norm ball B(x; r) inside the unit square, by slicing along the
// first axis (Euclidean slices are parametrised by angle to remove the square-root
// endpoint singularity).
double planar_overlap(const double* x, double r, Norm norm) {
  constexpr int kSlices = 1024;
  const double lo = std::max(x[0] - r, -0.5);
  const double hi = std::min(x[0] + r, 0.5);
  if (!(hi > lo)) return 0.0;
  double sum = 0.0;
  if (norm == Norm::Euclidean) {
    const double phi_lo = std::asin(std::clamp((lo - x[0]) / r, -1.0, 1.0));
    const double phi_hi = std::asin(std::clamp((hi - x[0]) / r, -1.0, 1.0));
    const double h = (phi_hi - phi_lo) / kSlices;
    for (int i = 0; i < kSlices; ++i) {
      const double phi = phi_lo + (i + 0.5) * h;
      const double w = r * std::cos(phi);
      sum += overlap(x[1] - w, x[1] + w) * w;
    }
    return sum * h;
  }
  const double h = (hi - lo) / kSlices;
  for (int i = 0; i < kSlices; ++i) {
    const double u = lo + (i + 0.5) * h - x[0];
    const double w = r - std::abs(u);
    sum += overlap(x[1] - w, x[1] + w);
  }
  return sum * h;
}

double ball_mass_mc(const double* x, double r, Norm norm, const Density& density, std::int64_t samples, RngStream& rng) {
  const int d = density.dim();
  std::vector<double> y(d);
  double sum = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    sample_uniform_ball(d, norm, r, rng.engine(), y.data());
    for (int a = 0; a < d; ++a) y[a] += x[a];
    sum += density(y.data());
  }
  return unit_ball_volume(d, norm) * std::pow(r, d) * sum / static_cast<double>(samples);
}

// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int m) {
  std::vector<double> nodes(m), weights(m);
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      const double p = std::legendre(m, x);
      dp = m * (x * p - std::legendre(m - 1, x)) / (x * x - 1.0);
      const double step = p / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double p = std::legendre(m, x);
    dp = m * (x * p - std::legendre(m - 1, x)) / (x * x - 1.0);
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return {nodes, weights};
}

}  // namespace

double ball_mass(const double* x, double r, Norm norm, const Density& density, const ExpectedCountOptions& options,
                 RngStream& rng) {
  const int d = density.dim();
  const double volume = unit_ball_volume(d, norm) * std::pow(r, d);
  if (options.interior_approximation) return density(x) * volume;

  bool inside = true;
  for (int a = 0; a < d; ++a) inside = inside && std::abs(x[a]) + r <= 0.5;

  if (density.kind() == DensityKind::UniformCube) {
    if (inside) return volume;
    if (d == 1 || norm == Norm::MaxCoordinate) {
      double prod = 1.0;
      for (int a = 0; a < d; ++a) prod *= overlap(x[a] - r, x[a] + r);
      return prod;
    }
    if (d == 2) return planar_overlap(x, r, norm);
    return ball_mass_mc(x, r, norm, density, options.mc_samples, rng);
  }
  if (d == 1) {
    const double lo = std::max(x[0] - r, -0.5);
    const double hi = std::min(x[0] + r, 0.5);
    if (!(hi > lo)) return 0.0;
    return density.f_max() * (hi - lo) - abs_power_integral(lo, hi, density.exponent());
  }
  return ball_mass_mc(x, r, norm, density, options.mc_samples, rng);
}

double expected_degree_count(double n, double r, int k, Norm norm, const Density& density,
                             const ExpectedCountOptions& options) {
  if (!(n >= 1.0) || !(r > 0.0) || k < 0) throw std::invalid_argument("expected_degree_count: bad arguments");
  const int d = density.dim();
  const auto n_int = static_cast<std::int64_t>(std::llround(n));
  auto q = [&](double mass) {
    return options.mode == CountMode::Binomial ? std::exp(log_binomial_pmf(n_int - 1, mass, k))
                                               : std::exp(log_poisson_pmf(n * mass, k));
  };
  RngStream rng(options.seed, 0);

  if (d >= 3) {
    const std::int64_t outer = std::max<std::int64_t>(options.mc_samples / 5, 1000);
    std::vector<double> x(d);
    double sum = 0.0;
    for (std::int64_t i = 0; i < outer; ++i) {
      sample_point(density, rng, x.data());
      sum += q(ball_mass(x.data(), r, norm, density, options, rng));
    }
    return n * sum / static_cast<double>(outer);
  }

  // Per-axis pieces: the two boundary strips of width r and the interior.
  std::vector<std::pair<double, double>> pieces;
  if (r < 0.5 && !options.interior_approximation) {
    pieces = {{-0.5, -0.5 + r}, {-0.5 + r, 0.5 - r}, {0.5 - r, 0.5}};
  } else {
    pieces = {{-0.5, 0.5}};
  }
  const int m = std::max(1, options.nodes_per_axis);
  const auto [gl_nodes, gl_weights] = gauss_legendre(m);
  const bool uniform = density.kind() == DensityKind::UniformCube;
  double total = 0.0;
  std::vector<int> piece_idx(d, 0);
  const int piece_count = static_cast<int>(pieces.size());
  int combos = 1;
  for (int a = 0; a < d; ++a) combos *= piece_count;
  std::vector<double> x(d);
  for (int c = 0; c < combos; ++c) {
    int rem = c;
    bool interior = true;
    double volume = 1.0;
    for (int a = 0; a < d; ++a) {
      piece_idx[a] = rem % piece_count;
      rem /= piece_count;
      interior = interior && (piece_count == 1 || piece_idx[a] == 1);
      volume *= pieces[piece_idx[a]].second - pieces[piece_idx[a]].first;
    }
    if (!(volume > 0.0)) continue;
    if (uniform && interior) {
      for (int a = 0; a < d; ++a) x[a] = 0.5 * (pieces[piece_idx[a]].first + pieces[piece_idx[a]].second);
      total += q(ball_mass(x.data(), r, norm, density, options, rng)) * volume;
      continue;
    }
    const int nodes = d == 1 ? m : m * m;
    for (int node = 0; node < nodes; ++node) {
      int rn = node;
      double weight = 1.0;
      for (int a = 0; a < d; ++a) {
        const auto [lo, hi] = pieces[piece_idx[a]];
        x[a] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl_nodes[rn % m];
        weight *= 0.5 * (hi - lo) * gl_weights[rn % m];
        rn /= m;
      }
      const double fx = density(x.data());
      if (fx > 0.0) total += q(ball_mass(x.data(), r, norm, density, options, rng)) * fx * weight;
    }
  }
  return n * total;
}

double expected_degree_count_asymptotic(double n, double r, int k, Norm norm, const Density& density) {
  const int d = density.dim();
  const double theta = unit_ball_volume(d, norm);
  const double log_lead = (k + 1) * std::log(n) + d * k * std::log(r) + k * std::log(theta) - std::lgamma(k + 1.0);
  return std::exp(log_lead) * integrate_density_power(density, k + 1, std::nullopt);
}

double simplified_condition(double n, int k_n) { return k_n * std::exp(-std::log(n) / k_n); }

double gumbel_statistic(double S, double n, int k_n, int d, double theta, const Density& density,
                        GumbelVariant variant, bool* warned) {
  if (!(S > 0.0) || !(n > 0.0) || k_n < 1) throw std::invalid_argument("gumbel_statistic: arguments must be positive");
  const double k = k_n;
  const double f_max = density.f_max();
  const double ntsd = n * theta * std::pow(S, d);
  const double lead = std::numbers::e * f_max * std::exp(std::log(n) / k) * ntsd;
  double value;
  if (variant == GumbelVariant::Full) {
    value = -lead * std::exp(-f_max * ntsd / k);
  } else {
    value = -lead;
    if (simplified_condition(n, k_n) >= 0.1) {
      if (warned) {
        *warned = true;
      } else {
        static std::atomic<bool> once{false};
        if (!once.exchange(true))
          std::cerr << "warning: simplified Gumbel statistic used with k n^{-1/k} = " << simplified_condition(n, k_n)
                    << " >= 0.1\n";
      }
    }
  }
  value += k + std::log(std::sqrt(2.0 * std::numbers::pi));
  if (density.kind() == DensityKind::RadialPeak) {
    const double s = density.exponent();
    value += (0.5 + d / s) * std::log(k) - std::log(density.peak_constant()) - (1.0 + d / s) * std::log(f_max);
  } else {
    value += 0.5 * std::log(k);
  }
  return value;
}

double probability_limit_ratio(double S, double n, int k_n, int d, double theta) {
  if (!(S > 0.0) || !(n > 0.0) || k_n < 1 || !(theta > 0.0))
    throw std::invalid_argument("probability_limit_ratio: arguments must be positive");
  return std::exp((1.0 + 1.0 / k_n) * std::log(n)) * theta * std::pow(S, d) / k_n;
}

double H(double t) {
  if (t < 0.0) throw std::domain_error("H: negative argument");
  if (t == 0.0) return 1.0;
  return 1.0 - t + t * std::log(t);
}

double tail_bound(TailKind kind, const TailParams& params) {
  switch (kind) {
    case TailKind::BinomialUpper:
    case TailKind::BinomialLower: {
      if (params.n < 1 || !(params.p > 0.0 && params.p < 1.0))
        throw std::invalid_argument("tail_bound: binomial needs n >= 1 and p in (0, 1)");
      const double mean = static_cast<double>(params.n) * params.p;
      if (kind == TailKind::BinomialUpper && params.k < mean)
        throw std::invalid_argument("tail_bound: binomial upper bound needs k >= np");
      if (kind == TailKind::BinomialLower && params.k > mean)
        throw std::invalid_argument("tail_bound: binomial lower bound needs k <= np");
      return std::exp(-mean * H(params.k / mean));
    }
    case TailKind::PoissonUpper:
    case TailKind::PoissonLower: {
      if (!(params.lambda > 0.0)) throw std::invalid_argument("tail_bound: poisson needs lambda > 0");
      if (kind == TailKind::PoissonUpper && params.k < params.lambda)
        throw std::invalid_argument("tail_bound: poisson upper bound needs k >= lambda");
      if (kind == TailKind::PoissonLower && params.k > params.lambda)
        throw std::invalid_argument("tail_bound: poisson lower bound needs k <= lambda");
      return std::exp(-params.lambda * H(params.k / params.lambda));
    }
    case TailKind::Poisson34Upper:
    case TailKind::Poisson34Lower:
      if (!(params.lambda > 0.0)) throw std::invalid_argument("tail_bound: poisson needs lambda > 0");
      return std::exp(-std::sqrt(params.lambda) / 9.0);
  }
  throw std::invalid_argument("tail_bound: unknown kind");
}

namespace {

double palm_sum(const PalmFunctional& h, const PointMatrix& config) {
  const Index n = config.cols();
  const int j = h.j;
  if (n < j) return 0.0;
  PointMatrix sub(config.rows(), j);
  std::vector<Index> chosen(j);
  double total = 0.0;

  if (h.locality) {
    const CellGrid grid(config, cell_size_for_radius(*h.locality));
    std::vector<std::vector<Index>> adj(n);
    for (Index i = 0; i < n; ++i) adj[i] = grid.range_neighbors(i, *h.locality, h.norm);
    // Cliques of G(config; locality) listed in increasing index order.
    auto rec = [&](auto&& self, int depth, const std::vector<Index>& candidates) -> void {
      if (depth == j) {
        for (int l = 0; l < j; ++l) sub.col(l) = config.col(chosen[l]);
        total += h.eval(sub, config);
        return;
      }
      for (Index c : candidates) {
        chosen[depth] = c;
        std::vector<Index> next;
        for (Index u : adj[c]) {
          if (u > c && std::binary_search(candidates.begin(), candidates.end(), u)) next.push_back(u);
        }
        self(self, depth + 1, next);
      }
    };
    for (Index i = 0; i < n; ++i) {
      chosen[0] = i;
      std::vector<Index> next;
      for (Index u : adj[i]) {
        if (u > i) next.push_back(u);
      }
      if (j == 1) {
        sub.col(0) = config.col(i);
        total += h.eval(sub, config);
      } else {
        rec(rec, 1, next);
      }
    }
    return total;
  }

  for (int l = 0; l < j; ++l) chosen[l] = l;
  while (true) {
    for (int l = 0; l < j; ++l) sub.col(l) = config.col(chosen[l]);
    total += h.eval(sub, config);
    int l = j - 1;
    while (l >= 0 && chosen[l] == n - j + l) --l;
    if (l < 0) break;
    ++chosen[l];
    for (int m = l + 1; m < j; ++m) chosen[m] = chosen[m - 1] + 1;
  }
  return total;
}

}  // namespace

PalmEstimate palm_lhs_rhs(const PalmFunctional& h, double lambda, const Density& density, std::int64_t replicates,
                          std::uint64_t master_seed, int workers) {
  if (h.j < 1) throw std::invalid_argument("palm_lhs_rhs: j must be >= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("palm_lhs_rhs: lambda must be positive");
  if (replicates < 2) throw std::invalid_argument("palm_lhs_rhs: need at least 2 replicates");
  if (!h.eval) throw std::invalid_argument("palm_lhs_rhs: missing functional");

  const double factor = std::exp(h.j * std::log(lambda) - std::lgamma(h.j + 1.0));
  std::vector<double> lhs(replicates), rhs(replicates);
  parallel_for(replicates, workers, [&](std::int64_t i) {
    RngStream left(master_seed, 2 * static_cast<std::uint64_t>(i));
    lhs[i] = palm_sum(h, sample_poisson_process(lambda, density, left).points);

    RngStream right(master_seed, 2 * static_cast<std::uint64_t>(i) + 1);
    const PointMatrix typical = sample_binomial(h.j, density, right).points;
    const PointMatrix rest = sample_poisson_process(lambda, density, right).points;
    PointMatrix config(density.dim(), typical.cols() + rest.cols());
    config << typical, rest;
    rhs[i] = factor * h.eval(typical, config);
  });

  auto mean_se = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
  };
  PalmEstimate out;
  std::tie(out.lhs, out.lhs_se) = mean_se(lhs);
  std::tie(out.rhs, out.rhs_se) = mean_se(rhs);
  out.replicates = replicates;
  return out;
}

}  // namespace rgg
