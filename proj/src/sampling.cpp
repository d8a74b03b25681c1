#include "rgg/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rgg {

namespace {

double midpoint_moment(int d, double s, int cells) {
  const double h = 1.0 / cells;
  std::vector<int> idx(d, 0);
  double sum = 0.0;
  while (true) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double x = -0.5 + (idx[a] + 0.5) * h;
      r2 += x * x;
    }
    sum += std::pow(r2, 0.5 * s);
    int a = 0;
    while (a < d && ++idx[a] == cells) {
      idx[a] = 0;
      ++a;
    }
    if (a == d) break;
  }
  return sum * std::pow(h, d);
}

}  // namespace

double cube_moment(int d, double s) {
  if (d < 1) throw std::invalid_argument("cube_moment: dimension must be >= 1");
  static std::mutex mu;
  static std::map<std::pair<int, double>, double> cache;
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find({d, s}); it != cache.end()) return it->second;
  }
  int cells = static_cast<int>(std::ceil(std::pow(1e6, 1.0 / d)));
  cells += cells % 2;
  const double coarse = midpoint_moment(d, s, cells);
  const double fine = midpoint_moment(d, s, 2 * cells);
  const double value = (4.0 * fine - coarse) / 3.0;
  std::lock_guard lock(mu);
  cache[{d, s}] = value;
  return value;
}

Density Density::uniform_cube(int d) {
  if (d < 1) throw std::invalid_argument("Density: dimension must be >= 1");
  return Density(DensityKind::UniformCube, d, 0.0, 1.0);
}

Density Density::radial_peak(int d, double s) {
  if (d < 1) throw std::invalid_argument("Density: dimension must be >= 1");
  if (!(s > 0.0)) throw std::invalid_argument("Density: radial peak exponent must be positive");
  const double f_max = 1.0 + cube_moment(d, s);
  if (f_max < std::pow(std::sqrt(static_cast<double>(d)) / 2.0, s))
    throw std::invalid_argument("Density: radial peak would be negative on the cube");
  return Density(DensityKind::RadialPeak, d, s, f_max);
}

Density Density::parse(std::string_view tag, int d) {
  if (tag == "uniform") return uniform_cube(d);
  if (tag.starts_with("radial:")) {
    const std::string rest(tag.substr(7));
    std::size_t used = 0;
    const double s = std::stod(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("bad density tag: " + std::string(tag));
    return radial_peak(d, s);
  }
  throw std::invalid_argument("unknown density: " + std::string(tag));
}

std::string Density::tag() const {
  if (kind_ == DensityKind::UniformCube) return "uniform";
  std::ostringstream os;
  os << "radial:" << s_;
  return os.str();
}

double Density::operator()(const double* x) const {
  double r2 = 0.0;
  for (int a = 0; a < dim_; ++a) {
    if (!(x[a] >= -0.5 && x[a] <= 0.5)) return 0.0;
    r2 += x[a] * x[a];
  }
  if (kind_ == DensityKind::UniformCube) return 1.0;
  return f_max_ - std::pow(r2, 0.5 * s_);
}

double Density::peak_constant() const {
  if (kind_ == DensityKind::UniformCube) return 1.0;
  const double d = dim_;
  const double sphere = 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
  return sphere * std::tgamma(d / s_) / s_;
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed), stream_index_(stream_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream_index), static_cast<std::uint32_t>(stream_index >> 32),
                    0x52474731u};
  engine_.seed(seq);
}

std::int64_t RngStream::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("poisson: mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  return std::poisson_distribution<std::int64_t>(mean)(engine_);
}

void sample_point(const Density& density, RngStream& rng, double* out, RejectionStats& stats) {
  const int d = density.dim();
  if (density.kind() == DensityKind::UniformCube) {
    for (int a = 0; a < d; ++a) out[a] = rng.uniform() - 0.5;
    ++stats.proposals;
    ++stats.accepted;
    return;
  }
  while (true) {
    for (int a = 0; a < d; ++a) out[a] = rng.uniform() - 0.5;
    const double u = rng.uniform() * density.f_max();
    ++stats.proposals;
    if (u <= density(out)) {
      ++stats.accepted;
      return;
    }
  }
}

void sample_point(const Density& density, RngStream& rng, double* out) {
  RejectionStats ignored;
  sample_point(density, rng, out, ignored);
}

namespace {

void fill_points(PointMatrix& pts, Index from, const Density& density, RngStream& rng) {
  for (Index i = from; i < pts.cols(); ++i) sample_point(density, rng, pts.col(i).data());
}

}  // namespace

PointCloud sample_binomial(Index n, const Density& density, RngStream& rng) {
  if (n < 0) throw std::invalid_argument("sample_binomial: n must be >= 0");
  PointCloud cloud;
  cloud.points.resize(density.dim(), n);
  fill_points(cloud.points, 0, density, rng);
  cloud.density_tag = density.tag();
  cloud.seed = rng.stream_index();
  return cloud;
}

PointCloud sample_poisson_process(double lambda, const Density& density, RngStream& rng) {
  if (!(lambda > 0.0)) throw std::invalid_argument("sample_poisson_process: lambda must be positive");
  return sample_binomial(rng.poisson(lambda), density, rng);
}

CoupledClouds sample_coupled(Index n, const Density& density, RngStream& rng) {
  if (n < 0) throw std::invalid_argument("sample_coupled: n must be >= 0");
  const double margin = std::pow(static_cast<double>(n), 0.75);
  CoupledClouds out;
  out.n = n;
  out.n_minus = rng.poisson(std::max(0.0, n - margin));
  out.n_plus = out.n_minus + rng.poisson(2.0 * margin);
  out.points.resize(density.dim(), std::max(n, out.n_plus));
  fill_points(out.points, 0, density, rng);
  return out;
}

void WeightLaw::validate() const {
  if (atoms.empty()) throw std::invalid_argument("WeightLaw: no atoms");
  double total = 0.0;
  for (const auto& [value, p] : atoms) {
    if (value < 1) throw std::invalid_argument("WeightLaw: multiplicities must be >= 1");
    if (!(p >= 0.0)) throw std::invalid_argument("WeightLaw: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("WeightLaw: probabilities must sum to 1");
}

double WeightLaw::mean() const {
  double m = 0.0;
  for (const auto& [value, p] : atoms) m += value * p;
  return m;
}

int WeightLaw::draw(RngStream& rng) const {
  double u = rng.uniform();
  for (const auto& [value, p] : atoms) {
    if (u < p) return value;
    u -= p;
  }
  return atoms.back().first;
}

Index MarkedCloud::total_mass() const {
  Index total = 0;
  for (int m : multiplicity) total += m;
  return total;
}

MarkedCloud sample_compound_poisson_pp(double total_mass, const Density& density, const WeightLaw& weights,
                                       RngStream& rng) {
  weights.validate();
  if (!(total_mass >= 0.0) || !std::isfinite(total_mass))
    throw std::invalid_argument("sample_compound_poisson_pp: total mass must be finite and >= 0");
  MarkedCloud out;
  const Index count = rng.poisson(total_mass);
  out.points.resize(density.dim(), count);
  out.multiplicity.resize(count);
  for (Index i = 0; i < count; ++i) {
    sample_point(density, rng, out.points.col(i).data());
    out.multiplicity[i] = weights.draw(rng);
  }
  return out;
}

void write_cloud(std::ostream& os, const PointCloud& cloud) {
  os << "# d=" << cloud.dim() << " n=" << cloud.size() << " density=" << cloud.density_tag << " seed=" << cloud.seed
     << '\n';
  os << std::setprecision(17);
  for (Index i = 0; i < cloud.size(); ++i) {
    for (int a = 0; a < cloud.dim(); ++a) {
      if (a) os << ' ';
      os << cloud.points(a, i);
    }
    os << '\n';
  }
}

PointCloud read_cloud(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || !line.starts_with("# ")) throw std::runtime_error("read_cloud: missing header");
  std::istringstream header(line.substr(2));
  std::map<std::string, std::string> fields;
  for (std::string item; header >> item;) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::runtime_error("read_cloud: malformed header field " + item);
    fields[item.substr(0, eq)] = item.substr(eq + 1);
  }
  for (const char* key : {"d", "n", "density", "seed"}) {
    if (!fields.contains(key)) throw std::runtime_error(std::string("read_cloud: header lacks ") + key);
  }
  const int d = std::stoi(fields["d"]);
  const Index n = std::stoll(fields["n"]);
  PointCloud cloud;
  cloud.density_tag = fields["density"];
  cloud.seed = std::stoull(fields["seed"]);
  cloud.points.resize(d, n);
  for (Index i = 0; i < n; ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("read_cloud: truncated point list");
    std::istringstream row(line);
    for (int a = 0; a < d; ++a) {
      if (!(row >> cloud.points(a, i))) throw std::runtime_error("read_cloud: malformed point line");
    }
  }
  return cloud;
}

void sample_uniform_ball(int d, Norm norm, double radius, std::mt19937_64& eng, double* out) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  switch (norm) {
    case Norm::MaxCoordinate:
      for (int a = 0; a < d; ++a) out[a] = radius * (2.0 * unif(eng) - 1.0);
      return;
    case Norm::Euclidean: {
      if (d == 1) {
        out[0] = radius * (2.0 * unif(eng) - 1.0);
        return;
      }
      std::normal_distribution<double> gauss;
      double norm2 = 0.0;
      do {
        norm2 = 0.0;
        for (int a = 0; a < d; ++a) {
          out[a] = gauss(eng);
          norm2 += out[a] * out[a];
        }
      } while (norm2 == 0.0);
      const double scale = radius * std::pow(unif(eng), 1.0 / d) / std::sqrt(norm2);
      for (int a = 0; a < d; ++a) out[a] *= scale;
      return;
    }
    case Norm::SumAbs: {
      std::exponential_distribution<double> expo(1.0);
      double total = expo(eng);
      for (int a = 0; a < d; ++a) {
        out[a] = expo(eng);
        total += out[a];
      }
      for (int a = 0; a < d; ++a) out[a] *= (unif(eng) < 0.5 ? -radius : radius) / total;
      return;
    }
  }
}

}  // namespace rgg
