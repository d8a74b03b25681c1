#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rgg/geometry.hpp"

namespace rgg {

/// Real-valued sample with optional non-negative weights and a cached sorted view.
class EmpiricalSample {
 public:
  EmpiricalSample() = default;
  explicit EmpiricalSample(std::vector<double> values, std::vector<double> weights = {});

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  const std::vector<double>& values() const { return values_; }
  bool weighted() const { return !weights_.empty(); }

  /// Distinct sorted abscissae with the ECDF value at each (right-continuous).
  const std::vector<std::pair<double, double>>& steps() const;
  double ecdf(double x) const;
  /// Lower empirical quantile (smallest x with ECDF(x) >= p).
  double quantile(double p) const;
  double median() const { return quantile(0.5); }

 private:
  std::vector<double> values_;
  std::vector<double> weights_;
  mutable std::vector<std::pair<double, double>> steps_;
};

/// sup_x |ECDF(x) - F(x)|, evaluated on both sides of every jump.
double ks_distance(const EmpiricalSample& sample, const std::function<double(double)>& cdf);

/// Probability mass function on {0, 1, ..., size() - 1}; `tail` is the mass beyond.
struct Pmf {
  std::vector<double> p;
  double tail = 0.0;

  double at(std::int64_t k) const { return k >= 0 && k < static_cast<std::int64_t>(p.size()) ? p[k] : 0.0; }
  double mean() const;
  double variance() const;
};

Pmf empirical_pmf(std::span<const std::int64_t> sample);
Pmf poisson_pmf_table(double lambda, double tail_tolerance = 1e-12);

/// Sum over atoms of q_i * Poisson(rate_i).
struct CompoundPoissonLaw {
  std::vector<std::pair<int, double>> atoms;  // (q_i >= 1, rate_i >= 0)
  double tail_tolerance = 1e-12;
};

/// Convolution of the dilated Poisson pmfs, truncated where the remaining mass is
/// below the tolerance.
Pmf compound_poisson_pmf(const CompoundPoissonLaw& law);

/// Half the l1 distance; a positive tail on either side counts as mass off the window.
double tv_distance(const Pmf& p, const Pmf& q);
double tv_distance(const Pmf& p, std::span<const std::int64_t> sample);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

/// Throws std::invalid_argument when two boxes overlap.
void check_disjoint(std::span<const Box> boxes);

/// Count of points per box, each point contributing its weight (1 when absent).
std::vector<std::int64_t> box_counts(const PointMatrix& points, std::span<const Box> boxes,
                                     std::span<const int> weights = {});

struct BoxCountReport {
  std::vector<double> tv;  // per box
  struct Pair {
    int a = 0;
    int b = 0;
    double correlation = 0.0;
    double p_value = 1.0;  // two-sided, normal approximation
  };
  std::vector<Pair> pairs;
  double max_tv = 0.0;
  double max_abs_correlation = 0.0;
  double min_p_value = 1.0;
};

/// Compares per-box count laws with references and tests pairwise independence.
/// counts[r][b] is replicate r's count in box b.
BoxCountReport box_count_test(const std::vector<std::vector<std::int64_t>>& counts, std::span<const Pmf> references);

/// Same, starting from one (optionally weighted) point set per replicate.
BoxCountReport box_count_test(std::span<const PointMatrix> replicates, std::span<const Box> boxes,
                              std::span<const Pmf> references,
                              std::span<const std::vector<int>> weights = {});

}  // namespace rgg
