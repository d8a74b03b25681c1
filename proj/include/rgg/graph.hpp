#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rgg/geometry.hpp"
#include "rgg/small_graph.hpp"

namespace rgg {

/// Vertex degrees of the geometric graph G(X; r) and their histogram.
struct DegreeProfile {
  std::vector<Index> degrees;
  std::vector<Index> counts;  // counts[j] = number of vertices of degree j
  Index max_degree = 0;

  /// Number of vertices of degree j (0 when j is past the histogram).
  Index count(Index j) const { return j >= 0 && j < static_cast<Index>(counts.size()) ? counts[j] : 0; }
  /// Number of vertices with degree >= j.
  Index count_at_least(Index j) const;
  Index edge_count() const;
};

DegreeProfile degree_profile(const PointMatrix& points, double r, Norm norm);

/// Smallest radius at which some vertex reaches degree k: the minimum over points of the
/// k-th nearest-neighbour distance. Requires 1 <= k <= n - 1.
double threshold_radius(const PointMatrix& points, int k, Norm norm);

enum class ExtremeKind { ExactDegree, MaxDegree };

struct ExtremeTag {
  ExtremeKind kind = ExtremeKind::MaxDegree;
  Index degree = 0;  // used by ExactDegree

  static ExtremeTag exact(Index k) { return {ExtremeKind::ExactDegree, k}; }
  static ExtremeTag maximum() { return {ExtremeKind::MaxDegree, 0}; }
};

struct ExtremeSet {
  std::vector<Index> indices;
  PointMatrix coords;  // d x |indices|
  ExtremeTag tag;

  Index size() const { return static_cast<Index>(indices.size()); }
};

/// Vertices of degree exactly k, or of maximum degree, in G(X; r).
ExtremeSet extreme_points(const PointMatrix& points, double r, Norm norm, ExtremeTag tag);
ExtremeSet extreme_points(const PointMatrix& points, const DegreeProfile& profile, ExtremeTag tag);

/// Dilation after translation: x -> a * (x + y).
PointMatrix scale_translate(const PointMatrix& points, double a, const Eigen::Ref<const Eigen::VectorXd>& y);
ExtremeSet scale_translate(const ExtremeSet& set, double a, const Eigen::Ref<const Eigen::VectorXd>& y);

/// Number of vertex subsets Y with G(Y; r) isomorphic to `gamma` (connected, at most 6
/// vertices). Connected subsets are grown from their smallest index, so each is visited
/// exactly once; all of them lie within (j - 1) r of that root.
std::int64_t induced_subgraph_count(const PointMatrix& points, double r, Norm norm, const SmallGraph& gamma);

/// Counts for several connected graphs of the same order in one pass.
std::vector<std::int64_t> induced_subgraph_counts(const PointMatrix& points, double r, Norm norm,
                                                  std::span<const SmallGraph> gammas);

}  // namespace rgg
