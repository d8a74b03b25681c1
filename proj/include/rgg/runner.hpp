#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rgg/atlas.hpp"
#include "rgg/geometry.hpp"
#include "rgg/limit_laws.hpp"

namespace rgg {

enum class ExperimentKind {
  ThresholdWeibull,
  ThresholdGumbel,
  PhiFixedK,
  PhiGrowingK,
  Concentration,
  MuConstants,
  BoundsSuite,
  PalmSuite,
  ScheduleDump,
};

/// Accepts both the config names (threshold_weibull, ...) and the CLI names (weibull, ...).
ExperimentKind parse_experiment_kind(std::string_view name);
std::string_view to_string(ExperimentKind kind);
std::string_view command_name(ExperimentKind kind);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::ThresholdWeibull;
  int d = 2;
  Norm norm = Norm::Euclidean;
  std::string density = "uniform";
  std::vector<Index> n_grid{1000};
  int k = 1;
  KnRule kn_rule;
  double beta = 1.0;
  Index replicates = 10;
  std::uint64_t master_seed = 1;
  int workers = 1;
  std::string out_dir = "out";
  Index max_n = 20'000'000;
  double radius_exponent = 0.64;  // concentration: r_n = n^{-a}
  std::int64_t mu_samples = 1'000'000;
  std::string atlas_cache;  // optional path; loaded when present, written otherwise
  int boxes = 4;            // equal slabs along the first axis
  double lambda = 500.0;    // palm
  double palm_radius = 0.05;
  bool write_extremes = false;
  std::optional<double> threshold;

  /// Sets one key (config-file spelling, e.g. "n", "k_n_rule", "seed"). Throws on
  /// unknown keys or malformed values.
  void set(std::string_view key, std::string_view value);
  void validate() const;
  double pass_threshold() const;
  Density make_density() const { return Density::parse(density, d); }
};

/// Flat "key = value" lines; '#' and ';' start comments; [sections] are ignored.
ExperimentConfig load_config(std::istream& is, ExperimentConfig base = {});

struct ReplicateRecord {
  std::uint64_t seed = 0;  // replicate stream index
  Index n = 0;
  int d = 0;
  Norm norm = Norm::Euclidean;
  int k = 0;
  double r = 0.0;
  double S_k = 0.0;
  Index max_degree = 0;
  Index W_k = 0;
  Index W_km1 = 0;
  Index n_extreme = 0;
  double statistic = 0.0;
  double statistic_alt = 0.0;
  PointMatrix extremes;  // d x n_extreme
};

std::string records_header();
void write_records(std::ostream& os, const std::vector<ReplicateRecord>& records);
std::vector<ReplicateRecord> read_records(std::istream& is);
void write_extremes(std::ostream& os, const std::vector<ReplicateRecord>& records);
/// Fills `extremes` of matching (seed, n) records from a sidecar file.
void read_extremes(std::istream& is, std::vector<ReplicateRecord>& records);

struct PlotRow {
  double x = 0.0;
  double ecdf = 0.0;
  double cdf = 0.0;
};

/// Step data for ECDF versus a reference CDF: a left anchor with ECDF 0, then one row per
/// distinct sample value with the right-continuous ECDF.
std::vector<PlotRow> emit_plot_data(const std::vector<double>& values, const std::function<double(double)>& cdf);

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ReplicateRecord> records;
  std::vector<std::vector<std::string>> table;  // non-replicate experiments
  std::vector<std::string> table_header;
  nlohmann::json summary;
};

/// Runs the experiment; replicate i of grid point n uses RngStream(master_seed, i).
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes records.csv, summary.json and plot_*.csv (plus extremes.csv when enabled).
void write_outputs(const ExperimentResult& result);

/// Recomputes every summary figure from records.csv (and extremes.csv) in `out_dir`,
/// returning the mismatching keys (empty when the audit passes).
std::vector<std::string> audit_outputs(const std::string& out_dir);

}  // namespace rgg
