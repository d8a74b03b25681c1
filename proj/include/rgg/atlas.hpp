#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "rgg/geometry.hpp"
#include "rgg/sampling.hpp"
#include "rgg/small_graph.hpp"

namespace rgg {

enum class Feasibility { Yes, No, Undetermined };
std::string_view to_string(Feasibility f);

/// Isomorphism class of graphs on k+1 vertices with at least one vertex of degree k.
struct GraphClass {
  SmallGraph canonical;
  int q = 0;                   // vertices of degree k
  double mu = 0.0;             // weight constant for the chosen density and region
  double se = 0.0;
  double integral = 0.0;       // integral of the class indicator over (R^d)^k, origin pinned
  double integral_se = 0.0;
  std::int64_t n_samples = 0;
  Feasibility feasible = Feasibility::Undetermined;
};

/// All isomorphism classes of graphs on k+1 vertices having a vertex adjacent to every
/// other vertex, with q filled in. Requires k + 1 <= 8.
std::vector<GraphClass> enumerate_candidates(int k);

/// Largest norm any point can have in a unit-radius configuration isomorphic to a
/// graph with a dominating vertex and the origin as one vertex: 1 for K2, 2 otherwise.
double configuration_radius(int k);

/// Indicator that the unit-radius geometric graph on {0, x_1, ..., x_{j-1}} (columns
/// of `others`) is isomorphic to `target` (given in canonical form).
bool configuration_matches(const PointMatrix& others, Norm norm, const SmallGraph& target);

/// Integral of f^j over `region` intersected with the support (whole support if empty).
double integrate_density_power(const Density& density, int j, const std::optional<Box>& region);

struct MuEstimate {
  double mu = 0.0;
  double se = 0.0;
  double integral = 0.0;
  double integral_se = 0.0;
  std::int64_t n_samples = 0;
  Feasibility feasible = Feasibility::Undetermined;
};

/// Monte Carlo estimate of the class weight
///   (1/j!) * int_region f^j * int h_Gamma(0, x_1, ..., x_{j-1}) dx,
/// with x_l uniform in the norm ball of radius configuration_radius(k). Samples are
/// split into fixed batches with independent streams (master_seed, batch), so the
/// result does not depend on `workers`.
std::vector<MuEstimate> estimate_mu_all(const std::vector<GraphClass>& classes, int d, Norm norm,
                                        const Density& density, const std::optional<Box>& region,
                                        std::int64_t n_samples, std::uint64_t master_seed, int workers = 1);

MuEstimate estimate_mu(const GraphClass& cls, int d, Norm norm, const Density& density,
                       const std::optional<Box>& region, std::int64_t n_samples, std::uint64_t master_seed,
                       int workers = 1);

/// Tensor midpoint quadrature of int h_Gamma(0, x_1, ..., x_{j-1}) dx over the
/// configuration cube, `cells` nodes per axis (odd counts keep nodes off the
/// unit-distance hyperplanes). Practical for d * (j - 1) <= 3.
double mu_integral_quadrature(const SmallGraph& canonical, int d, Norm norm, int cells);

struct Atlas {
  int k = 0;
  int d = 0;
  Norm norm = Norm::Euclidean;
  std::string density_tag;
  std::vector<GraphClass> classes;
  double mu_dk = 0.0;
  double mu_dk_se = 0.0;
};

Atlas build_atlas(int k, int d, Norm norm, const Density& density, std::int64_t n_samples,
                  std::uint64_t master_seed, int workers = 1);

/// Limit intensity of degree-k vertices near a point where the density equals f_at_x0.
double lambda_x0(const Atlas& atlas, double f_at_x0);

/// Law of the cluster multiplicity: P[zeta = l] = sum of mu over classes with q = l,
/// divided by mu_dk. Throws when every class has zero weight.
WeightLaw weight_law(const Atlas& atlas);

/// Cache file: header, then one CSV record per class
/// `bits,q,mu,se,n_samples,d,norm,k,density`.
void save_atlas(std::ostream& os, const Atlas& atlas);
Atlas load_atlas(std::istream& is);

}  // namespace rgg
