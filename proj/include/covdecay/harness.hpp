#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "covdecay/decay.hpp"
#include "covdecay/estimate.hpp"
#include "covdecay/json_io.hpp"

namespace covdecay {

enum class Model { ma1, ar1, arfima };

std::string model_name(Model m);
Model parse_model(const std::string& s);

struct ExperimentConfig {
  Model model = Model::ar1;
  /// Parameter grid (theta, phi or d).
  std::vector<double> params;
  std::size_t n = 1000;
  std::size_t replications = 200;
  /// Maximum lags; AR1 and MA1 use m = 1.
  std::vector<std::size_t> m{1};
  std::uint64_t seed = 20240101;
  /// 0 = auto.
  int threads = 0;
  Distance distance = Distance::l1;
  /// Output directory; empty writes nothing.
  std::string output;

  void validate() const;
  Json to_json() const;
  static ExperimentConfig from_json(const Json& j);
};

struct McRow {
  double param = 0.0;
  std::size_t m = 0;
  std::string estimator;
  double mean = 0.0;
  double mse = 0.0;
  std::size_t failures = 0;
  std::size_t replications = 0;
};

struct ReplicationRecord {
  double param;
  std::size_t m;
  std::string estimator;
  std::size_t replication;
  std::uint64_t seed;
  double estimate;  // NaN on failure
};

struct McTable {
  std::vector<McRow> rows;
  std::vector<ReplicationRecord> records;

  const McRow& row(double param, std::size_t m, const std::string& estimator) const;
  std::string to_csv() const;
  std::string records_csv() const;
};

/// Simulate, estimate and aggregate; results are independent of the thread
/// count. Writes table.csv, replications.csv and manifest.json when
/// cfg.output is set.
McTable run_experiment(const ExperimentConfig& cfg);

/// Lowercase hex SHA-1 of "blob <size>\0<content>".
std::string git_blob_hash(const std::string& content);

// ---------------------------------------------------------------------------
// Real-data analysis
// ---------------------------------------------------------------------------

/// Last numeric column of each row; '#' lines and a non-numeric first line
/// (header) are skipped. Other non-numeric rows raise IngestionError.
std::vector<double> read_series_csv(const std::string& path);
std::vector<double> parse_series_csv(const std::string& text);
std::string series_to_csv(const std::vector<double>& xs);

std::vector<double> log_returns(const std::vector<double>& prices);
std::vector<double> sample_acf(const std::vector<double>& xs, std::size_t max_lag);
/// I(lambda_j) = |sum_t x_t e^{-i t lambda_j}|^2 / (2 pi n), lambda_j = 2 pi j / n,
/// j = 1 .. floor(n/2).
std::vector<std::pair<double, double>> periodogram(const std::vector<double>& xs);

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
};
/// Sturges rule: ceil(log2 n) + 1 bins.
Histogram histogram(const std::vector<double>& xs);

enum class InputKind { prices, series };

struct AnalyzeOptions {
  InputKind input = InputKind::prices;
  bool absolute = false;
  MarginalFit marginal = MarginalFit::exponential;
  /// Fixed marginal instead of fitting (e.g. Exp given as a rate).
  std::optional<Marginal> fixed_marginal;
  std::size_t m = 25;
  std::size_t acf_lags = 50;
  double bootstrap_mean_block = 1000.0;
  std::size_t bootstrap_b = 0;  // 0 disables the bootstrap
  std::uint64_t seed = 1;
  int threads = 0;
  SearchOptions search;
};

struct AnalyzeResult {
  std::vector<double> series;
  EstimateReport report;
  std::vector<double> acf;
  std::vector<std::pair<double, double>> periodogram;
  Histogram hist;
  std::vector<std::string> warnings;

  Json to_json() const;
};

AnalyzeResult analyze(const std::vector<double>& raw, const AnalyzeOptions& opt);
AnalyzeResult analyze_file(const std::string& path, const AnalyzeOptions& opt);

Json kconst_json(Family family, const Marginal& f0, const Marginal& fn, int order);

}  // namespace covdecay
