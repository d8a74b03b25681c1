#pragma once

#include <cstdint>
#include <vector>

#include "rgg/geometry.hpp"
#include "rgg/small_graph.hpp"

namespace oracle {

using rgg::Index;
using rgg::Norm;
using rgg::PointMatrix;

// Full distance matrix; every entry through rgg::distance so results compare bitwise.
std::vector<std::vector<double>> distance_matrix(const PointMatrix& pts, Norm norm);

std::vector<Index> neighbours(const PointMatrix& pts, Index i, double r, Norm norm);
std::vector<Index> degrees(const PointMatrix& pts, double r, Norm norm);

// k-th smallest entry of row i (excluding the diagonal), by full sort.
double knn_distance(const PointMatrix& pts, Index i, int k, Norm norm);
double threshold_radius(const PointMatrix& pts, int k, Norm norm);

// Isomorphism by trying every vertex permutation.
bool isomorphic(const rgg::SmallGraph& a, const rgg::SmallGraph& b);

// Number of j-subsets whose induced geometric graph is isomorphic to gamma.
std::int64_t subgraph_count(const PointMatrix& pts, double r, Norm norm, const rgg::SmallGraph& gamma);

// Lambert W0 by bisection on w e^w = t over [-1, max(1, log(1 + t))].
double lambert_w0(double t);

// Exact tails by a forward product recurrence of the pmf in long double.
double binomial_upper(std::int64_t n, double p, std::int64_t k);  // P[Bin >= k]
double binomial_lower(std::int64_t n, double p, std::int64_t k);  // P[Bin <= k]
double poisson_upper(double lambda, std::int64_t k);              // P[Po >= k]
double poisson_lower(double lambda, std::int64_t k);              // P[Po <= k]

// Midpoint quadrature over [-R, R]^2 of the indicator that the unit-radius graph on
// {0, x1, x2} (d = 1) has the given number of edges.
double three_vertex_integral_d1(int edges, int cells);

// Length of [x - r, x + r] inside [-1/2, 1/2].
double interval_overlap(double x, double r);

// E[W_k] for d = 1 uniform by a fine midpoint rule with exact overlaps.
double expected_degree_count_d1(double n, double r, int k, bool poisson, int cells);

}  // namespace oracle
