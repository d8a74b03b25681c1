#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rgg/geometry.hpp"

namespace rgg {

enum class DensityKind { UniformCube, RadialPeak };

/// Probability density on the cube [-1/2, 1/2]^d.
///
/// UniformCube: f = 1 on the cube.
/// RadialPeak(s): f(x) = f_max - |x|_2^s on the cube, with f_max fixed by the
/// normalisation. The peak at the origin is the unique maximum.
class Density {
 public:
  static Density uniform_cube(int d);
  static Density radial_peak(int d, double s);
  /// Parses "uniform" or "radial:<s>".
  static Density parse(std::string_view tag, int d);

  DensityKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double exponent() const { return s_; }
  double f_max() const { return f_max_; }
  std::string tag() const;

  double operator()(const double* x) const;
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const { return (*this)(x.data()); }

  /// Integral of exp(-|z|_2^s) over R^d (the peak-shape constant of the Gumbel scaling).
  /// Defined as 1 for the uniform density, which has no peak.
  double peak_constant() const;

 private:
  Density(DensityKind kind, int d, double s, double f_max) : kind_(kind), dim_(d), s_(s), f_max_(f_max) {}

  DensityKind kind_;
  int dim_;
  double s_;
  double f_max_;
};

/// Integral of |x|_2^s over [-1/2,1/2]^d by Richardson-extrapolated midpoint quadrature
/// (at least 10^6 cells). Cached per (d, s).
double cube_moment(int d, double s);

/// Deterministic random stream for one replicate: identical (master_seed, stream_index)
/// pairs reproduce identical draws.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }
  std::mt19937_64& engine() { return engine_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  std::int64_t poisson(double mean);

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
};

struct PointCloud {
  PointMatrix points;  // d x n
  std::string density_tag;
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(points.rows()); }
  Index size() const { return points.cols(); }
};

/// One draw from the density (uniform: direct; radial peak: rejection from f_max * 1_cube).
void sample_point(const Density& density, RngStream& rng, double* out);

/// Rejection sampler with acceptance statistics, for checking the acceptance rate.
struct RejectionStats {
  std::int64_t proposals = 0;
  std::int64_t accepted = 0;
};
void sample_point(const Density& density, RngStream& rng, double* out, RejectionStats& stats);

/// Uniform point in the closed norm ball of the given radius about the origin.
void sample_uniform_ball(int d, Norm norm, double radius, std::mt19937_64& eng, double* out);

/// n i.i.d. points with law f.
PointCloud sample_binomial(Index n, const Density& density, RngStream& rng);

/// Poisson(lambda) many i.i.d. points with law f: a Poisson process with intensity lambda * f.
PointCloud sample_poisson_process(double lambda, const Density& density, RngStream& rng);

/// Nested clouds P^- within X_n within P^+ built from one i.i.d. stream, with
/// N^- ~ Poisson(n - n^{3/4}) and N^+ = N^- + Poisson(2 n^{3/4}). The nesting holds
/// when N^- <= n <= N^+.
struct CoupledClouds {
  PointMatrix points;  // max(n, N^+) columns; each cloud is a prefix
  Index n_minus = 0;
  Index n = 0;
  Index n_plus = 0;

  PointMatrix minus() const { return points.leftCols(n_minus); }
  PointMatrix binomial() const { return points.leftCols(n); }
  PointMatrix plus() const { return points.leftCols(n_plus); }
  bool nested() const { return n_minus <= n && n <= n_plus; }
};
CoupledClouds sample_coupled(Index n, const Density& density, RngStream& rng);

/// Discrete law on positive integers: atoms (value, probability).
struct WeightLaw {
  std::vector<std::pair<int, double>> atoms;

  void validate() const;
  double mean() const;
  int draw(RngStream& rng) const;
};

struct MarkedCloud {
  PointMatrix points;
  std::vector<int> multiplicity;

  Index total_mass() const;
};

/// Compound Poisson point process: support points form a Poisson process with intensity
/// total_mass * f, and each carries an i.i.d. multiplicity from `weights`.
MarkedCloud sample_compound_poisson_pp(double total_mass, const Density& density, const WeightLaw& weights,
                                       RngStream& rng);

/// Text format: header "# d=<d> n=<n> density=<tag> seed=<s>", then one point per line.
void write_cloud(std::ostream& os, const PointCloud& cloud);
PointCloud read_cloud(std::istream& is);

}  // namespace rgg
