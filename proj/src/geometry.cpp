#include "rgg/geometry.hpp"

#include <algorithm>
#include <array>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace rgg {

Norm parse_norm(std::string_view name) {
  if (name == "euclidean" || name == "l2") return Norm::Euclidean;
  if (name == "max" || name == "linf" || name == "maxcoordinate") return Norm::MaxCoordinate;
  if (name == "sum" || name == "l1" || name == "sumabs") return Norm::SumAbs;
  throw std::invalid_argument("unknown norm: " + std::string(name));
}

std::string_view to_string(Norm norm) {
  switch (norm) {
    case Norm::Euclidean: return "euclidean";
    case Norm::MaxCoordinate: return "max";
    case Norm::SumAbs: return "sum";
  }
  return "?";
}

double unit_ball_volume(int d, Norm norm) {
  if (d < 1) throw std::invalid_argument("unit_ball_volume: dimension must be >= 1");
  switch (norm) {
    case Norm::Euclidean:
      return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
    case Norm::MaxCoordinate:
      return std::ldexp(1.0, d);
    case Norm::SumAbs:
      return std::ldexp(1.0, d) / std::tgamma(d + 1.0);
  }
  return 0.0;
}

double distance(const double* a, const double* b, int d, Norm norm) {
  switch (norm) {
    case Norm::Euclidean: {
      double s = 0.0;
      for (int k = 0; k < d; ++k) {
        const double t = a[k] - b[k];
        s += t * t;
      }
      return std::sqrt(s);
    }
    case Norm::MaxCoordinate: {
      double m = 0.0;
      for (int k = 0; k < d; ++k) m = std::max(m, std::abs(a[k] - b[k]));
      return m;
    }
    case Norm::SumAbs: {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += std::abs(a[k] - b[k]);
      return s;
    }
  }
  return 0.0;
}

double norm_of(const Eigen::Ref<const Eigen::VectorXd>& x, Norm norm) {
  switch (norm) {
    case Norm::Euclidean: return x.norm();
    case Norm::MaxCoordinate: return x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
    case Norm::SumAbs: return x.cwiseAbs().sum();
  }
  return 0.0;
}

bool Box::contains(const double* x) const {
  for (int a = 0; a < dim(); ++a) {
    if (!(x[a] >= lo[a] && x[a] < hi[a])) return false;
  }
  return true;
}

double Box::volume() const { return (hi - lo).cwiseMax(0.0).prod(); }

bool Box::overlaps(const Box& other) const {
  for (int a = 0; a < dim(); ++a) {
    if (std::min(hi[a], other.hi[a]) <= std::max(lo[a], other.lo[a])) return false;
  }
  return true;
}

Index box_count(const PointMatrix& pts, const Box& box) {
  if (pts.cols() > 0 && pts.rows() != box.dim()) throw std::invalid_argument("box_count: dimension mismatch");
  Index c = 0;
  for (Index i = 0; i < pts.cols(); ++i) c += box.contains(pts.col(i).data()) ? 1 : 0;
  return c;
}

// ---------------------------------------------------------------------------
// CellGrid

namespace {

using CellArray = std::array<std::int64_t, kMaxGridDim>;

std::int64_t checked_floor(double u) {
  constexpr double kLimit = 1152921504606846976.0;  // 2^60
  if (!(std::abs(u) < kLimit)) throw std::invalid_argument("CellGrid: coordinate too large for cell size");
  return static_cast<std::int64_t>(std::floor(u));
}

}  // namespace

CellGrid::CellGrid(const PointMatrix& points, double cell_size)
    : points_(&points), dim_(static_cast<int>(points.rows())), cell_size_(cell_size) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw std::invalid_argument("CellGrid: cell_size must be positive");
  const Index n = points.cols();
  if (n > 0 && dim_ < 1) throw std::invalid_argument("CellGrid: points must have dimension >= 1");
  if (dim_ > kMaxGridDim) throw std::invalid_argument("CellGrid: dimension too large");
  if (!points.allFinite()) throw std::invalid_argument("CellGrid: non-finite coordinate");

  min_cell_.assign(dim_, 0);
  extent_.assign(dim_, 0);
  stride_.assign(dim_, 0);
  if (n == 0) return;

  std::vector<std::int64_t> cells(static_cast<std::size_t>(n) * dim_);
  std::vector<std::int64_t> max_cell(dim_, std::numeric_limits<std::int64_t>::min());
  std::fill(min_cell_.begin(), min_cell_.end(), std::numeric_limits<std::int64_t>::max());
  double max_abs = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (int a = 0; a < dim_; ++a) {
      const double x = points(a, i);
      max_abs = std::max(max_abs, std::abs(x));
      const std::int64_t c = checked_floor(x / cell_size_);
      cells[i * dim_ + a] = c;
      min_cell_[a] = std::min(min_cell_[a], c);
      max_cell[a] = std::max(max_cell[a], c);
    }
  }
  slack_ = 1e-9 + 8.0 * DBL_EPSILON * (max_abs / cell_size_);

  unsigned __int128 total = 1;
  for (int a = 0; a < dim_; ++a) {
    extent_[a] = max_cell[a] - min_cell_[a] + 1;
    stride_[a] = static_cast<std::uint64_t>(total);
    total *= static_cast<unsigned __int128>(extent_[a]);
    if (total > (static_cast<unsigned __int128>(1) << 63)) throw std::invalid_argument("CellGrid: too many cells");
  }

  std::vector<std::uint64_t> key(n);
  for (Index i = 0; i < n; ++i) {
    std::uint64_t k = 0;
    for (int a = 0; a < dim_; ++a) k += static_cast<std::uint64_t>(cells[i * dim_ + a] - min_cell_[a]) * stride_[a];
    key[i] = k;
  }

  const auto cell_total = static_cast<std::uint64_t>(total);
  dense_ = cell_total <= std::max<std::uint64_t>(4 * static_cast<std::uint64_t>(n), 1u << 16);
  order_.resize(n);
  if (dense_) {
    dense_start_.assign(cell_total + 1, 0);
    for (Index i = 0; i < n; ++i) ++dense_start_[key[i] + 1];
    for (std::uint64_t c = 0; c < cell_total; ++c) {
      if (dense_start_[c + 1] > 0) ++nonempty_;
      dense_start_[c + 1] += dense_start_[c];
    }
    std::vector<Index> fill(dense_start_.begin(), dense_start_.end() - 1);
    for (Index i = 0; i < n; ++i) order_[fill[key[i]]++] = i;
  } else {
    std::iota(order_.begin(), order_.end(), Index{0});
    std::stable_sort(order_.begin(), order_.end(), [&](Index a, Index b) { return key[a] < key[b]; });
    keys_.resize(n);
    for (Index i = 0; i < n; ++i) keys_[i] = key[order_[i]];
    std::vector<std::uint64_t> distinct(keys_);
    nonempty_ = static_cast<std::size_t>(std::unique(distinct.begin(), distinct.end()) - distinct.begin());
  }
}

void CellGrid::relative_cell(const double* x, std::int64_t* rel) const {
  for (int a = 0; a < dim_; ++a) rel[a] = checked_floor(x[a] / cell_size_) - min_cell_[a];
}

std::vector<std::int64_t> CellGrid::cell_of(Index i) const {
  if (i < 0 || i >= size()) throw std::out_of_range("CellGrid::cell_of: index out of range");
  std::vector<std::int64_t> c(dim_);
  relative_cell(points_->col(i).data(), c.data());
  for (int a = 0; a < dim_; ++a) c[a] += min_cell_[a];
  return c;
}

std::span<const Index> CellGrid::bucket_by_offset(std::span<const std::int64_t> rel) const {
  std::uint64_t k = 0;
  for (int a = 0; a < dim_; ++a) {
    if (rel[a] < 0 || rel[a] >= extent_[a]) return {};
    k += static_cast<std::uint64_t>(rel[a]) * stride_[a];
  }
  if (dense_) {
    const Index b = dense_start_[k];
    const Index e = dense_start_[k + 1];
    return {order_.data() + b, static_cast<std::size_t>(e - b)};
  }
  const auto [lo, hi] = std::equal_range(keys_.begin(), keys_.end(), k);
  return {order_.data() + (lo - keys_.begin()), static_cast<std::size_t>(hi - lo)};
}

std::span<const Index> CellGrid::bucket(std::span<const std::int64_t> cell) const {
  if (static_cast<int>(cell.size()) != dim_) throw std::invalid_argument("CellGrid::bucket: dimension mismatch");
  if (order_.empty()) return {};
  CellArray rel{};
  for (int a = 0; a < dim_; ++a) rel[a] = cell[a] - min_cell_[a];
  return bucket_by_offset({rel.data(), static_cast<std::size_t>(dim_)});
}

std::int64_t CellGrid::reach_for(double r) const {
  const double u = r / cell_size_ * (1.0 + 1e-12) + slack_;
  if (u > 1e15) return std::numeric_limits<std::int64_t>::max() / 4;
  return static_cast<std::int64_t>(std::ceil(u));
}

double CellGrid::shell_clearance(const double* x, std::span<const std::int64_t> rel) const {
  double m = 1.0;
  for (int a = 0; a < dim_; ++a) {
    const double u = x[a] / cell_size_ - static_cast<double>(rel[a] + min_cell_[a]);
    m = std::min({m, u, 1.0 - u});
  }
  return std::max(0.0, m - slack_);
}

template <typename Fn>
void CellGrid::for_each_in_block(std::span<const std::int64_t> center, std::int64_t reach, Fn&& fn) const {
  CellArray lo{}, hi{}, cur{};
  for (int a = 0; a < dim_; ++a) {
    lo[a] = std::max<std::int64_t>(0, center[a] - std::min(reach, center[a]));
    hi[a] = std::min<std::int64_t>(extent_[a] - 1, center[a] + std::min(reach, extent_[a]));
    if (lo[a] > hi[a]) return;
    cur[a] = lo[a];
  }
  const std::span<const std::int64_t> view(cur.data(), static_cast<std::size_t>(dim_));
  while (true) {
    fn(bucket_by_offset(view));
    int a = 0;
    while (a < dim_ && ++cur[a] > hi[a]) {
      cur[a] = lo[a];
      ++a;
    }
    if (a == dim_) return;
  }
}

template <typename Fn>
void CellGrid::for_each_in_shell(std::span<const std::int64_t> center, std::int64_t shell, Fn&& fn) const {
  CellArray lo{}, hi{}, cur{};
  for (int a = 0; a < dim_; ++a) {
    lo[a] = std::max<std::int64_t>(0, center[a] - shell);
    hi[a] = std::min<std::int64_t>(extent_[a] - 1, center[a] + shell);
    cur[a] = lo[a];
  }
  const std::span<const std::int64_t> view(cur.data(), static_cast<std::size_t>(dim_));
  while (true) {
    std::int64_t cheb = 0;
    for (int a = 0; a < dim_; ++a) cheb = std::max(cheb, std::abs(cur[a] - center[a]));
    if (cheb == shell) fn(bucket_by_offset(view));
    int a = 0;
    while (a < dim_ && ++cur[a] > hi[a]) {
      cur[a] = lo[a];
      ++a;
    }
    if (a == dim_) return;
  }
}

std::vector<Index> CellGrid::range_neighbors(Index i, double r, Norm norm) const {
  if (i < 0 || i >= size()) throw std::out_of_range("range_neighbors: index out of range");
  if (!(r > 0.0)) throw std::invalid_argument("range_neighbors: radius must be positive");
  const double* xi = points_->col(i).data();
  CellArray c{};
  relative_cell(xi, c.data());
  std::vector<Index> out;
  for_each_in_block({c.data(), static_cast<std::size_t>(dim_)}, reach_for(r), [&](std::span<const Index> b) {
    for (Index j : b) {
      if (j != i && distance(xi, points_->col(j).data(), dim_, norm) <= r) out.push_back(j);
    }
  });
  std::sort(out.begin(), out.end());
  return out;
}

Index CellGrid::range_count(Index i, double r, Norm norm) const {
  if (i < 0 || i >= size()) throw std::out_of_range("range_count: index out of range");
  const double* xi = points_->col(i).data();
  CellArray c{};
  relative_cell(xi, c.data());
  Index count = 0;
  for_each_in_block({c.data(), static_cast<std::size_t>(dim_)}, reach_for(r), [&](std::span<const Index> b) {
    for (Index j : b) {
      if (j != i && distance(xi, points_->col(j).data(), dim_, norm) <= r) ++count;
    }
  });
  return count;
}

double CellGrid::knn_distance(Index i, int k, Norm norm) const {
  if (i < 0 || i >= size()) throw std::out_of_range("knn_distance: index out of range");
  if (k < 1) throw std::invalid_argument("knn_distance: k must be >= 1");
  if (k >= size()) throw std::invalid_argument("knn_distance: insufficient points (k >= n)");
  const double* xi = points_->col(i).data();
  CellArray c{};
  relative_cell(xi, c.data());
  const std::span<const std::int64_t> center(c.data(), static_cast<std::size_t>(dim_));
  std::int64_t last_shell = 0;
  for (int a = 0; a < dim_; ++a) last_shell = std::max({last_shell, c[a], extent_[a] - 1 - c[a]});
  const double clearance = shell_clearance(xi, center);

  std::vector<double> found;
  for (std::int64_t s = 0;; ++s) {
    for_each_in_shell(center, s, [&](std::span<const Index> b) {
      for (Index j : b) {
        if (j != i) found.push_back(distance(xi, points_->col(j).data(), dim_, norm));
      }
    });
    if (static_cast<Index>(found.size()) >= k) {
      std::nth_element(found.begin(), found.begin() + (k - 1), found.end());
      const double kth = found[k - 1];
      if (s >= last_shell || kth <= (static_cast<double>(s) + clearance) * cell_size_) return kth;
    }
    if (s >= last_shell) break;
  }
  throw std::logic_error("knn_distance: search exhausted grid");
}

double CellGrid::knn_distance_within(Index i, int k, double bound, Norm norm) const {
  if (i < 0 || i >= size()) throw std::out_of_range("knn_distance_within: index out of range");
  if (!std::isfinite(bound)) return knn_distance(i, k, norm);
  const double* xi = points_->col(i).data();
  CellArray c{};
  relative_cell(xi, c.data());
  thread_local std::vector<double> found;
  found.clear();
  for_each_in_block({c.data(), static_cast<std::size_t>(dim_)}, reach_for(bound), [&](std::span<const Index> b) {
    for (Index j : b) {
      if (j == i) continue;
      const double dist = distance(xi, points_->col(j).data(), dim_, norm);
      if (dist <= bound) found.push_back(dist);
    }
  });
  if (static_cast<Index>(found.size()) < k) return std::numeric_limits<double>::infinity();
  std::nth_element(found.begin(), found.begin() + (k - 1), found.end());
  return found[k - 1];
}

}  // namespace rgg
