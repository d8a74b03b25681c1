#include "rgg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rgg/limit_laws.hpp"

namespace rgg {

EmpiricalSample::EmpiricalSample(std::vector<double> values, std::vector<double> weights)
    : values_(std::move(values)), weights_(std::move(weights)) {
  if (!weights_.empty() && weights_.size() != values_.size())
    throw std::invalid_argument("EmpiricalSample: weights do not match values");
  for (double w : weights_) {
    if (!(w >= 0.0)) throw std::invalid_argument("EmpiricalSample: negative weight");
  }
  for (double v : values_) {
    if (std::isnan(v)) throw std::invalid_argument("EmpiricalSample: NaN value");
  }
}

const std::vector<std::pair<double, double>>& EmpiricalSample::steps() const {
  if (!steps_.empty() || values_.empty()) return steps_;
  std::vector<std::size_t> order(values_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values_[a] < values_[b]; });
  const double total = weighted() ? std::accumulate(weights_.begin(), weights_.end(), 0.0)
                                  : static_cast<double>(values_.size());
  if (!(total > 0.0)) throw std::invalid_argument("EmpiricalSample: zero total weight");
  double acc = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    acc += weighted() ? weights_[order[i]] : 1.0;
    const double x = values_[order[i]];
    if (i + 1 < order.size() && values_[order[i + 1]] == x) continue;
    steps_.emplace_back(x, i + 1 == order.size() ? 1.0 : acc / total);
  }
  return steps_;
}

double EmpiricalSample::ecdf(double x) const {
  const auto& s = steps();
  auto it = std::upper_bound(s.begin(), s.end(), x, [](double v, const auto& st) { return v < st.first; });
  return it == s.begin() ? 0.0 : std::prev(it)->second;
}

double EmpiricalSample::quantile(double p) const {
  const auto& s = steps();
  if (s.empty()) throw std::invalid_argument("EmpiricalSample::quantile: empty sample");
  for (const auto& [x, F] : s) {
    if (F >= p) return x;
  }
  return s.back().first;
}

double ks_distance(const EmpiricalSample& sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_distance: empty sample");
  double prev = 0.0;
  double d = 0.0;
  for (const auto& [x, F] : sample.steps()) {
    const double G = cdf(x);
    d = std::max({d, std::abs(F - G), std::abs(G - prev)});
    prev = F;
  }
  return d;
}

double Pmf::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) m += static_cast<double>(k) * p[k];
  return m;
}

double Pmf::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) v += (static_cast<double>(k) - m) * (static_cast<double>(k) - m) * p[k];
  return v;
}

Pmf empirical_pmf(std::span<const std::int64_t> sample) {
  if (sample.empty()) throw std::invalid_argument("empirical_pmf: empty sample");
  Pmf out;
  const std::int64_t hi = *std::max_element(sample.begin(), sample.end());
  if (*std::min_element(sample.begin(), sample.end()) < 0) throw std::invalid_argument("empirical_pmf: negative value");
  out.p.assign(hi + 1, 0.0);
  const double w = 1.0 / static_cast<double>(sample.size());
  for (std::int64_t v : sample) out.p[v] += w;
  return out;
}

Pmf poisson_pmf_table(double lambda, double tail_tolerance) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("poisson_pmf_table: negative rate");
  Pmf out;
  double acc = 0.0;
  for (std::int64_t k = 0;; ++k) {
    const double pk = poisson_pmf(lambda, k);
    out.p.push_back(pk);
    acc += pk;
    if (static_cast<double>(k) > lambda && 1.0 - acc < tail_tolerance) break;
    if (k > 10 * static_cast<std::int64_t>(lambda) + 1000) break;
  }
  out.tail = std::max(0.0, 1.0 - acc);
  return out;
}

Pmf compound_poisson_pmf(const CompoundPoissonLaw& law) {
  Pmf out;
  out.p = {1.0};
  const double per_atom = law.tail_tolerance / std::max<std::size_t>(1, law.atoms.size());
  for (const auto& [q, rate] : law.atoms) {
    if (q < 1) throw std::invalid_argument("compound_poisson_pmf: multiplicities must be >= 1");
    if (!(rate >= 0.0)) throw std::invalid_argument("compound_poisson_pmf: negative rate");
    if (rate == 0.0) continue;
    const Pmf base = poisson_pmf_table(rate, per_atom);
    std::vector<double> next(out.p.size() + (base.p.size() - 1) * q, 0.0);
    for (std::size_t a = 0; a < out.p.size(); ++a) {
      if (out.p[a] == 0.0) continue;
      for (std::size_t m = 0; m < base.p.size(); ++m) next[a + m * q] += out.p[a] * base.p[m];
    }
    out.p = std::move(next);
  }
  while (out.p.size() > 1 && out.p.back() == 0.0) out.p.pop_back();
  out.tail = std::max(0.0, 1.0 - std::accumulate(out.p.begin(), out.p.end(), 0.0));
  return out;
}

double tv_distance(const Pmf& p, const Pmf& q) {
  const std::size_t n = std::max(p.p.size(), q.p.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += std::abs(p.at(static_cast<std::int64_t>(k)) - q.at(static_cast<std::int64_t>(k)));
  sum += std::abs(p.tail - q.tail);
  return std::min(1.0, 0.5 * sum);
}

double tv_distance(const Pmf& p, std::span<const std::int64_t> sample) { return tv_distance(p, empirical_pmf(sample)); }

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("pearson_correlation: need matching samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

void check_disjoint(std::span<const Box> boxes) {
  for (std::size_t a = 0; a < boxes.size(); ++a) {
    for (std::size_t b = a + 1; b < boxes.size(); ++b) {
      if (boxes[a].overlaps(boxes[b])) throw std::invalid_argument("box_count_test: boxes overlap");
    }
  }
}

std::vector<std::int64_t> box_counts(const PointMatrix& points, std::span<const Box> boxes, std::span<const int> weights) {
  check_disjoint(boxes);
  if (!weights.empty() && static_cast<Index>(weights.size()) != points.cols())
    throw std::invalid_argument("box_counts: weights do not match points");
  std::vector<std::int64_t> out(boxes.size(), 0);
  for (Index i = 0; i < points.cols(); ++i) {
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      if (boxes[b].contains(points.col(i).data())) {
        out[b] += weights.empty() ? 1 : weights[i];
        break;
      }
    }
  }
  return out;
}

BoxCountReport box_count_test(const std::vector<std::vector<std::int64_t>>& counts, std::span<const Pmf> references) {
  if (counts.empty()) throw std::invalid_argument("box_count_test: no replicates");
  const std::size_t boxes = references.size();
  for (const auto& row : counts) {
    if (row.size() != boxes) throw std::invalid_argument("box_count_test: count rows do not match references");
  }
  BoxCountReport report;
  std::vector<std::vector<double>> columns(boxes, std::vector<double>(counts.size()));
  for (std::size_t b = 0; b < boxes; ++b) {
    std::vector<std::int64_t> col(counts.size());
    for (std::size_t r = 0; r < counts.size(); ++r) {
      col[r] = counts[r][b];
      columns[b][r] = static_cast<double>(counts[r][b]);
    }
    report.tv.push_back(tv_distance(references[b], col));
    report.max_tv = std::max(report.max_tv, report.tv.back());
  }
  const double sqrt_n = std::sqrt(static_cast<double>(counts.size()));
  for (std::size_t a = 0; a < boxes; ++a) {
    for (std::size_t b = a + 1; b < boxes; ++b) {
      BoxCountReport::Pair pair;
      pair.a = static_cast<int>(a);
      pair.b = static_cast<int>(b);
      pair.correlation = counts.size() >= 2 ? pearson_correlation(columns[a], columns[b]) : 0.0;
      pair.p_value = std::erfc(std::abs(pair.correlation) * sqrt_n / std::sqrt(2.0));
      report.max_abs_correlation = std::max(report.max_abs_correlation, std::abs(pair.correlation));
      report.min_p_value = std::min(report.min_p_value, pair.p_value);
      report.pairs.push_back(pair);
    }
  }
  return report;
}

BoxCountReport box_count_test(std::span<const PointMatrix> replicates, std::span<const Box> boxes,
                              std::span<const Pmf> references, std::span<const std::vector<int>> weights) {
  if (boxes.size() != references.size()) throw std::invalid_argument("box_count_test: one reference per box");
  if (!weights.empty() && weights.size() != replicates.size())
    throw std::invalid_argument("box_count_test: weights do not match replicates");
  check_disjoint(boxes);
  std::vector<std::vector<std::int64_t>> counts;
  counts.reserve(replicates.size());
  for (std::size_t r = 0; r < replicates.size(); ++r) {
    counts.push_back(box_counts(replicates[r], boxes, weights.empty() ? std::span<const int>{} : std::span<const int>(weights[r])));
  }
  return box_count_test(counts, references);
}

}  // namespace rgg
