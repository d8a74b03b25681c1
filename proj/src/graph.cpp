#include "rgg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rgg {

Index DegreeProfile::count_at_least(Index j) const {
  Index total = 0;
  for (Index m = std::max<Index>(j, 0); m < static_cast<Index>(counts.size()); ++m) total += counts[m];
  return total;
}

Index DegreeProfile::edge_count() const {
  Index twice = 0;
  for (Index d : degrees) twice += d;
  return twice / 2;
}

namespace {

// Copy of the cloud with columns grouped by grid cell, so neighbouring queries touch
// neighbouring memory; order[m] is the original index of column m.
PointMatrix cell_ordered(const PointMatrix& points, double cell_size, std::vector<Index>& order) {
  const CellGrid grid(points, cell_size);
  order.assign(grid.order().begin(), grid.order().end());
  PointMatrix sorted(points.rows(), points.cols());
  for (Index m = 0; m < points.cols(); ++m) sorted.col(m) = points.col(order[m]);
  return sorted;
}

}  // namespace

DegreeProfile degree_profile(const PointMatrix& points, double r, Norm norm) {
  if (!(r > 0.0)) throw std::invalid_argument("degree_profile: radius must be positive");
  DegreeProfile profile;
  const Index n = points.cols();
  profile.degrees.assign(n, 0);
  if (n == 0) return profile;
  std::vector<Index> order;
  const PointMatrix sorted = cell_ordered(points, cell_size_for_radius(r), order);
  const CellGrid grid(sorted, cell_size_for_radius(r));
  for (Index m = 0; m < n; ++m) {
    const Index deg = grid.range_count(m, r, norm);
    profile.degrees[order[m]] = deg;
    profile.max_degree = std::max(profile.max_degree, deg);
  }
  profile.counts.assign(profile.max_degree + 1, 0);
  for (Index deg : profile.degrees) ++profile.counts[deg];
  return profile;
}

namespace {

// Cell size near the typical k-nearest-neighbour distance of the cloud's bounding box.
double knn_cell_size(const PointMatrix& points, int k) {
  const int d = static_cast<int>(points.rows());
  const Eigen::VectorXd extent = points.rowwise().maxCoeff() - points.rowwise().minCoeff();
  const double longest = extent.maxCoeff();
  if (!(longest > 0.0)) return 1.0;
  double volume = 1.0;
  for (int a = 0; a < d; ++a) volume *= std::max(extent[a], longest * 1e-6);
  return std::pow(volume * (k + 1) / static_cast<double>(points.cols()), 1.0 / d);
}

}  // namespace

double threshold_radius(const PointMatrix& points, int k, Norm norm) {
  const Index n = points.cols();
  if (k < 1) throw std::invalid_argument("threshold_radius: k must be >= 1");
  if (k >= n) throw std::invalid_argument("threshold_radius: insufficient points (k >= n)");
  std::vector<Index> order;
  const double cell = 0.5 * knn_cell_size(points, k);
  const PointMatrix sorted = cell_ordered(points, cell, order);
  const CellGrid grid(sorted, cell);
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) best = std::min(best, grid.knn_distance_within(i, k, best, norm));
  return best;
}

ExtremeSet extreme_points(const PointMatrix& points, const DegreeProfile& profile, ExtremeTag tag) {
  if (static_cast<Index>(profile.degrees.size()) != points.cols())
    throw std::invalid_argument("extreme_points: profile does not match the cloud");
  const Index target = tag.kind == ExtremeKind::ExactDegree ? tag.degree : profile.max_degree;
  ExtremeSet out;
  out.tag = tag;
  for (Index i = 0; i < points.cols(); ++i) {
    if (profile.degrees[i] == target) out.indices.push_back(i);
  }
  out.coords.resize(points.rows(), out.size());
  for (Index m = 0; m < out.size(); ++m) out.coords.col(m) = points.col(out.indices[m]);
  return out;
}

ExtremeSet extreme_points(const PointMatrix& points, double r, Norm norm, ExtremeTag tag) {
  return extreme_points(points, degree_profile(points, r, norm), tag);
}

PointMatrix scale_translate(const PointMatrix& points, double a, const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (!(a > 0.0)) throw std::invalid_argument("scale_translate: scale must be positive");
  if (points.cols() > 0 && y.size() != points.rows()) throw std::invalid_argument("scale_translate: dimension mismatch");
  return a * (points.colwise() + y);
}

ExtremeSet scale_translate(const ExtremeSet& set, double a, const Eigen::Ref<const Eigen::VectorXd>& y) {
  ExtremeSet out = set;
  out.coords = scale_translate(set.coords, a, y);
  return out;
}

namespace {

// Enumerates connected vertex sets of a fixed size, each exactly once from its smallest
// vertex (the ESU scheme: a vertex joins the extension only if it is exclusive to the
// newest member).
class ConnectedSetEnumerator {
 public:
  ConnectedSetEnumerator(const PointMatrix& points, double r, Norm norm, int size,
                         const std::vector<std::vector<Index>>& adjacency, IsomorphismClassifier& classifier,
                         std::vector<std::int64_t>& counts)
      : points_(points), r_(r), norm_(norm), size_(size), adj_(adjacency), classifier_(classifier), counts_(counts) {}

  void run_from(Index root) {
    root_ = root;
    members_.assign(1, root);
    std::vector<Index> ext;
    for (Index u : adj_[root]) {
      if (u > root) ext.push_back(u);
    }
    extend(ext);
  }

 private:
  bool adjacent(Index a, Index b) const { return distance(points_, a, b, norm_) <= r_; }

  bool in_closed_neighbourhood(Index u) const {
    for (Index m : members_) {
      if (u == m || adjacent(u, m)) return true;
    }
    return false;
  }

  void extend(std::vector<Index> ext) {
    if (static_cast<int>(members_.size()) == size_) {
      SmallGraph g(size_);
      for (int a = 0; a < size_; ++a) {
        for (int b = a + 1; b < size_; ++b) {
          if (adjacent(members_[a], members_[b])) g.add_edge(a, b);
        }
      }
      const int cls = classifier_.classify(g);
      if (cls >= 0) ++counts_[cls];
      return;
    }
    while (!ext.empty()) {
      const Index w = ext.back();
      ext.pop_back();
      std::vector<Index> next = ext;
      for (Index u : adj_[w]) {
        if (u <= root_ || in_closed_neighbourhood(u)) continue;
        if (std::find(next.begin(), next.end(), u) == next.end()) next.push_back(u);
      }
      members_.push_back(w);
      extend(std::move(next));
      members_.pop_back();
    }
  }

  const PointMatrix& points_;
  double r_;
  Norm norm_;
  int size_;
  const std::vector<std::vector<Index>>& adj_;
  IsomorphismClassifier& classifier_;
  std::vector<std::int64_t>& counts_;
  Index root_ = 0;
  std::vector<Index> members_;
};

}  // namespace

std::vector<std::int64_t> induced_subgraph_counts(const PointMatrix& points, double r, Norm norm,
                                                  std::span<const SmallGraph> gammas) {
  if (!(r > 0.0)) throw std::invalid_argument("induced_subgraph_count: radius must be positive");
  if (gammas.empty()) return {};
  const int j = gammas.front().order();
  if (j > 6) throw std::invalid_argument("induced_subgraph_count: graphs larger than 6 vertices are not supported");
  if (j < 1) throw std::invalid_argument("induced_subgraph_count: empty graph");
  for (const auto& g : gammas) {
    if (g.order() != j) throw std::invalid_argument("induced_subgraph_count: graphs must share their order");
    if (!g.connected()) throw std::invalid_argument("induced_subgraph_count: graph must be connected");
  }
  std::vector<std::int64_t> counts(gammas.size(), 0);
  const Index n = points.cols();
  if (n < j) return counts;
  IsomorphismClassifier classifier(gammas, j);
  if (j == 1) {
    for (auto& c : counts) c = n;
    return counts;
  }
  const CellGrid grid(points, cell_size_for_radius(r));
  std::vector<std::vector<Index>> adjacency(n);
  for (Index i = 0; i < n; ++i) adjacency[i] = grid.range_neighbors(i, r, norm);
  ConnectedSetEnumerator enumerator(points, r, norm, j, adjacency, classifier, counts);
  for (Index root = 0; root < n; ++root) enumerator.run_from(root);
  return counts;
}

std::int64_t induced_subgraph_count(const PointMatrix& points, double r, Norm norm, const SmallGraph& gamma) {
  return induced_subgraph_counts(points, r, norm, std::span<const SmallGraph>(&gamma, 1)).front();
}

}  // namespace rgg
