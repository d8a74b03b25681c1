#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace rgg {

/// Points are stored column-wise: a cloud of n points in R^d is a d x n matrix.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;
using Point = Eigen::VectorXd;
using Index = std::int64_t;

enum class Norm { Euclidean, MaxCoordinate, SumAbs };

Norm parse_norm(std::string_view name);
std::string_view to_string(Norm norm);

/// Lebesgue volume of the closed unit ball {x : |x| <= 1} in R^d.
double unit_ball_volume(int d, Norm norm);

/// Norm of the difference of two d-dimensional points given by raw column pointers.
/// Every distance computed anywhere in the library goes through this function, so
/// grid queries and brute-force checks agree bitwise.
double distance(const double* a, const double* b, int d, Norm norm);

inline double distance(const PointMatrix& pts, Index i, Index j, Norm norm) {
  return distance(pts.col(i).data(), pts.col(j).data(), static_cast<int>(pts.rows()), norm);
}

double norm_of(const Eigen::Ref<const Eigen::VectorXd>& x, Norm norm);

/// Axis-aligned half-open box [lo, hi).
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const double* x) const;
  double volume() const;
  bool overlaps(const Box& other) const;
};

/// Number of columns of `pts` inside `box`.
Index box_count(const PointMatrix& pts, const Box& box);

/// Cell size for a grid answering radius-r queries by scanning one shell of neighbours.
/// Slightly larger than r so that floating-point rounding of x / cell_size never forces a
/// second shell.
inline double cell_size_for_radius(double r) { return r * (1.0 + 1e-6); }

inline constexpr int kMaxGridDim = 16;

/// Uniform-bucket spatial index over a borrowed point matrix (which must outlive the grid).
/// Immutable after construction; all queries are const and safe to run concurrently.
class CellGrid {
 public:
  CellGrid(const PointMatrix& points, double cell_size);

  int dim() const { return dim_; }
  Index size() const { return static_cast<Index>(order_.size()); }
  double cell_size() const { return cell_size_; }
  const PointMatrix& points() const { return *points_; }

  /// Number of non-empty buckets.
  Index bucket_count() const { return static_cast<Index>(nonempty_); }

  /// Point indices grouped bucket by bucket.
  std::span<const Index> order() const { return order_; }

  /// Absolute cell coordinates floor(x / cell_size) of point i.
  std::vector<std::int64_t> cell_of(Index i) const;

  /// Indices stored in the bucket with the given absolute cell coordinates (empty if none).
  std::span<const Index> bucket(std::span<const std::int64_t> cell) const;

  /// Indices j != i with |x_j - x_i| <= r, in increasing order.
  std::vector<Index> range_neighbors(Index i, double r, Norm norm) const;

  /// Number of j != i with |x_j - x_i| <= r.
  Index range_count(Index i, double r, Norm norm) const;

  /// k-th smallest distance from point i to the other points (expanding-shell search).
  double knn_distance(Index i, int k, Norm norm) const;

  /// k-th smallest distance from point i if it is <= bound, otherwise +inf.
  double knn_distance_within(Index i, int k, double bound, Norm norm) const;

 private:
  std::span<const Index> bucket_by_offset(std::span<const std::int64_t> rel) const;
  template <typename Fn>
  void for_each_in_shell(std::span<const std::int64_t> center, std::int64_t shell, Fn&& fn) const;
  template <typename Fn>
  void for_each_in_block(std::span<const std::int64_t> center, std::int64_t reach, Fn&& fn) const;
  void relative_cell(const double* x, std::int64_t* rel) const;
  std::int64_t reach_for(double r) const;
  double shell_clearance(const double* x, std::span<const std::int64_t> rel) const;

  const PointMatrix* points_;
  int dim_ = 0;
  double cell_size_ = 0.0;

  std::vector<std::int64_t> min_cell_;  // per axis
  std::vector<std::int64_t> extent_;    // cells per axis
  std::vector<std::uint64_t> stride_;
  std::vector<Index> order_;            // point indices sorted by cell key
  std::vector<std::uint64_t> keys_;     // sorted keys, parallel to order_ (sparse mode)
  std::vector<Index> dense_start_;      // offsets per cell (dense mode), size cells+1
  bool dense_ = false;
  double slack_ = 0.0;                  // rounding allowance, in cell units
  std::size_t nonempty_ = 0;
};

}  // namespace rgg
