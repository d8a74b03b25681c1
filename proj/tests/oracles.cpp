#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oracle {

std::vector<std::vector<double>> distance_matrix(const PointMatrix& pts, Norm norm) {
  const Index n = pts.cols();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) m[i][j] = rgg::distance(pts, i, j, norm);
  }
  return m;
}

std::vector<Index> neighbours(const PointMatrix& pts, Index i, double r, Norm norm) {
  std::vector<Index> out;
  for (Index j = 0; j < pts.cols(); ++j) {
    if (j != i && rgg::distance(pts, i, j, norm) <= r) out.push_back(j);
  }
  return out;
}

std::vector<Index> degrees(const PointMatrix& pts, double r, Norm norm) {
  std::vector<Index> deg(pts.cols(), 0);
  for (Index i = 0; i < pts.cols(); ++i) {
    for (Index j = i + 1; j < pts.cols(); ++j) {
      if (rgg::distance(pts, i, j, norm) <= r) ++deg[i], ++deg[j];
    }
  }
  return deg;
}

double knn_distance(const PointMatrix& pts, Index i, int k, Norm norm) {
  std::vector<double> row;
  for (Index j = 0; j < pts.cols(); ++j) {
    if (j != i) row.push_back(rgg::distance(pts, i, j, norm));
  }
  std::sort(row.begin(), row.end());
  return row[k - 1];
}

double threshold_radius(const PointMatrix& pts, int k, Norm norm) {
  const auto m = distance_matrix(pts, norm);
  double best = INFINITY;
  for (Index i = 0; i < pts.cols(); ++i) {
    std::vector<double> row;
    for (Index j = 0; j < pts.cols(); ++j) {
      if (j != i) row.push_back(m[i][j]);
    }
    std::sort(row.begin(), row.end());
    best = std::min(best, row[k - 1]);
  }
  return best;
}

bool isomorphic(const rgg::SmallGraph& a, const rgg::SmallGraph& b) {
  if (a.order() != b.order()) return false;
  std::vector<int> perm(a.order());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (int u = 0; u < a.order() && ok; ++u) {
      for (int v = u + 1; v < a.order() && ok; ++v) ok = a.adjacent(u, v) == b.adjacent(perm[u], perm[v]);
    }
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

std::int64_t subgraph_count(const PointMatrix& pts, double r, Norm norm, const rgg::SmallGraph& gamma) {
  const int j = gamma.order();
  const Index n = pts.cols();
  if (j > n) return 0;
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + j, true);
  std::int64_t count = 0;
  do {
    std::vector<Index> sub;
    for (Index i = 0; i < n; ++i) {
      if (pick[i]) sub.push_back(i);
    }
    rgg::SmallGraph g(j);
    for (int u = 0; u < j; ++u) {
      for (int v = u + 1; v < j; ++v) {
        if (rgg::distance(pts, sub[u], sub[v], norm) <= r) g.add_edge(u, v);
      }
    }
    if (g.edge_count() == gamma.edge_count() && isomorphic(g, gamma)) ++count;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return count;
}

double lambert_w0(double t) {
  double lo = -1.0;
  double hi = std::max(1.0, std::log1p(std::max(t, 0.0)));
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid * std::exp(mid) < t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

std::vector<long double> binomial_pmf_row(std::int64_t n, double p) {
  std::vector<long double> pmf(n + 1);
  const long double q = 1.0L - p;
  pmf[0] = std::pow(q, static_cast<long double>(n));
  for (std::int64_t m = 1; m <= n; ++m) pmf[m] = pmf[m - 1] * static_cast<long double>(n - m + 1) / m * p / q;
  return pmf;
}

std::vector<long double> poisson_pmf_row(double lambda, std::int64_t upto) {
  // Start from the mode in log space so large lambda does not underflow.
  const auto mode = static_cast<std::int64_t>(std::floor(lambda));
  const std::int64_t len = std::max(upto, mode) + 1;
  std::vector<long double> pmf(len, 0.0L);
  const long double lm = -lambda + mode * std::log(static_cast<long double>(lambda)) - std::lgamma(static_cast<long double>(mode) + 1);
  pmf[mode] = std::exp(lm);
  for (std::int64_t m = mode + 1; m < len; ++m) pmf[m] = pmf[m - 1] * lambda / m;
  for (std::int64_t m = mode - 1; m >= 0; --m) pmf[m] = pmf[m + 1] * (m + 1) / lambda;
  return pmf;
}

}  // namespace

double binomial_upper(std::int64_t n, double p, std::int64_t k) {
  const auto pmf = binomial_pmf_row(n, p);
  long double s = 0.0L;
  for (std::int64_t m = std::max<std::int64_t>(k, 0); m <= n; ++m) s += pmf[m];
  return static_cast<double>(s);
}

double binomial_lower(std::int64_t n, double p, std::int64_t k) {
  const auto pmf = binomial_pmf_row(n, p);
  long double s = 0.0L;
  for (std::int64_t m = 0; m <= std::min(k, n); ++m) s += pmf[m];
  return static_cast<double>(s);
}

double poisson_upper(double lambda, std::int64_t k) {
  const std::int64_t upto = std::max<std::int64_t>(k, static_cast<std::int64_t>(lambda + 40.0 * std::sqrt(lambda) + 200.0));
  const auto pmf = poisson_pmf_row(lambda, upto);
  long double s = 0.0L;
  for (std::int64_t m = static_cast<std::int64_t>(pmf.size()) - 1; m >= std::max<std::int64_t>(k, 0); --m) s += pmf[m];
  return static_cast<double>(s);
}

double poisson_lower(double lambda, std::int64_t k) {
  const auto pmf = poisson_pmf_row(lambda, std::max<std::int64_t>(k, 0));
  long double s = 0.0L;
  for (std::int64_t m = 0; m <= k; ++m) s += pmf[m];
  return static_cast<double>(s);
}

double three_vertex_integral_d1(int edges, int cells) {
  const double R = 2.0;
  const double h = 2.0 * R / cells;
  double sum = 0.0;
  for (int a = 0; a < cells; ++a) {
    const double x1 = -R + (a + 0.5) * h;
    for (int b = 0; b < cells; ++b) {
      const double x2 = -R + (b + 0.5) * h;
      const int e = (std::abs(x1) <= 1.0) + (std::abs(x2) <= 1.0) + (std::abs(x1 - x2) <= 1.0);
      // Connected graphs only: two or three edges.
      if (e == edges) sum += 1.0;
    }
  }
  return sum * h * h;
}

double interval_overlap(double x, double r) { return std::max(0.0, std::min(x + r, 0.5) - std::max(x - r, -0.5)); }

double expected_degree_count_d1(double n, double r, int k, bool poisson, int cells) {
  const double h = 1.0 / cells;
  long double sum = 0.0L;
  for (int c = 0; c < cells; ++c) {
    const double x = -0.5 + (c + 0.5) * h;
    const double p = interval_overlap(x, r);
    long double q;
    if (poisson) {
      const long double mean = n * p;
      q = std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0L));
    } else {
      const long double m = n - 1;
      q = std::exp(std::lgamma(m + 1) - std::lgamma(k + 1.0L) - std::lgamma(m - k + 1) + k * std::log(static_cast<long double>(p)) +
                   (m - k) * std::log1p(-static_cast<long double>(p)));
    }
    sum += q;
  }
  return static_cast<double>(n * sum * h);
}

}  // namespace oracle
