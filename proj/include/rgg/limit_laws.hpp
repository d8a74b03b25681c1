#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "rgg/geometry.hpp"
#include "rgg/sampling.hpp"

namespace rgg {

/// Weibull-type law of the scaled threshold radius: F(x) = exp(-mu (-x)^dk) for x < 0
/// and 1 for x >= 0.
struct WeibullLaw {
  double mu_dk = 1.0;
  int exponent = 1;  // dk
};

double weibull_cdf(double x, const WeibullLaw& law);
/// Inverse of weibull_cdf on (0, 1).
double weibull_quantile(double p, const WeibullLaw& law);

double gumbel_cdf(double x);
double gumbel_quantile(double p);

/// Principal branch of the Lambert W function, defined for t >= -1/e.
double lambert_w0(double t);

/// r with n^{k+1} r^{dk} = beta.
double radius_fixed_k(double n, int k, int d, double beta);

struct GrowingRadius {
  double r = 0.0;
  double ntheta_r_d = 0.0;  // n * theta * r^d
  double residual = 0.0;    // log(beta implied by r) - log(beta)
};

/// Radius for growing k_n making the Stirling form of the expected count of degree-k_n
/// vertices equal to beta. Uniform density:
///   n theta r^d / k = -W0(-(1/e) (n / (beta sqrt(2 pi k)))^{-1/k}).
/// Radial peak (f_max - |x|^s):
///   n theta r^d f_max / k = -W0(-(1/e) (n gamma f_max^{1+d/s} / (beta sqrt(2 pi k^{1+2d/s})))^{-1/k}).
/// Throws std::domain_error when the W0 argument falls below -1/e.
GrowingRadius radius_growing(double n, int k_n, int d, double theta, double beta, const Density& density);

/// ceil(log n / log log n).
int k_n_log_over_loglog(double n);
/// ceil((log n)^alpha), alpha in (0, 1).
int k_n_log_power(double n, double alpha);

/// A k_n rule: "loglog" or "pow:<alpha>".
struct KnRule {
  enum class Kind { LogOverLogLog, LogPower } kind = Kind::LogOverLogLog;
  double alpha = 0.5;

  static KnRule parse(std::string_view text);
  int operator()(double n) const;
  std::string to_string() const;
};

double log_binomial_pmf(std::int64_t n, double p, std::int64_t k);
double log_poisson_pmf(double lambda, std::int64_t k);
double poisson_pmf(double lambda, std::int64_t k);

enum class CountMode { Binomial, Poisson };

struct ExpectedCountOptions {
  CountMode mode = CountMode::Binomial;
  /// Take F(B(x; r)) = f(x) theta r^d everywhere, ignoring the support boundary.
  bool interior_approximation = false;
  int nodes_per_axis = 64;  // Gauss-Legendre nodes per sub-interval of each axis
  std::int64_t mc_samples = 100000;
  std::uint64_t seed = 1;
};

/// F(B(x; r)) for the density on its cube support.
double ball_mass(const double* x, double r, Norm norm, const Density& density, const ExpectedCountOptions& options,
                 RngStream& rng);

/// E[W_k] = n int q(x) f(x) dx with q the Binomial(n-1, F(B(x;r))) or Poisson(n F(B(x;r)))
/// probability of k. Each axis is split at distance r from the faces so constant
/// interior pieces are integrated exactly; d = 3 uses Monte Carlo for the outer integral.
double expected_degree_count(double n, double r, int k, Norm norm, const Density& density,
                             const ExpectedCountOptions& options = {});

/// n^{k+1} r^{dk} theta^k / k! * int f^{k+1}: the leading term of E[W_k] at fixed k.
double expected_degree_count_asymptotic(double n, double r, int k, Norm norm, const Density& density);

enum class GumbelVariant { Full, Simplified };

/// k n^{-1/k}; the simplified statistic needs this to be small.
double simplified_condition(double n, int k_n);

/// Centred statistic of the threshold radius S that converges to the standard Gumbel law.
/// The simplified variant drops the exp(-n theta S^d / k) factor; when
/// simplified_condition(n, k_n) >= 0.1 it still returns a value but reports a warning
/// through `warned` (or stderr when null, once per process).
double gumbel_statistic(double S, double n, int k_n, int d, double theta, const Density& density,
                        GumbelVariant variant, bool* warned = nullptr);

/// n^{1+1/k} theta S^d / k, which tends to 1 / (f_max e).
double probability_limit_ratio(double S, double n, int k_n, int d, double theta);

/// H(t) = 1 - t + t log t, H(0) = 1.
double H(double t);

enum class TailKind { BinomialUpper, BinomialLower, PoissonUpper, PoissonLower, Poisson34Upper, Poisson34Lower };

struct TailParams {
  std::int64_t n = 0;
  double p = 0.0;
  double k = 0.0;
  double lambda = 0.0;
};

/// Chernoff-type tail bounds:
///   binomial  exp(-np H(k/np))   (upper needs k >= np, lower k <= np),
///   poisson   exp(-lambda H(k/lambda)),
///   poisson34 exp(-lambda^{1/2}/9) for the events Po >= lambda + lambda^{3/4}/2 and
///             Po <= lambda - lambda^{3/4}/2.
/// Throws std::invalid_argument when k lies on the wrong side of the mean.
double tail_bound(TailKind kind, const TailParams& params);

/// Functional h(Y, X) that vanishes unless |Y| = j. When `locality` is set, h must also
/// vanish whenever two points of Y are farther apart than it (in `norm`), which lets the
/// sum over sub-configurations skip distant subsets.
struct PalmFunctional {
  int j = 1;
  std::optional<double> locality;
  Norm norm = Norm::Euclidean;
  std::function<double(const PointMatrix& sub, const PointMatrix& config)> eval;
};

struct PalmEstimate {
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;
  double rhs_se = 0.0;
  std::int64_t replicates = 0;
};

/// Monte Carlo estimates of both sides of the Palm identity
///   E sum_{Y in P_lambda} h(Y, P_lambda) = lambda^j / j! E h(X'_j, X'_j + P_lambda).
/// Replicate i draws its left side from stream 2i and right side from stream 2i + 1.
PalmEstimate palm_lhs_rhs(const PalmFunctional& h, double lambda, const Density& density, std::int64_t replicates,
                          std::uint64_t master_seed, int workers = 1);

}  // namespace rgg
