#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "covdecay/json_io.hpp"
#include "covdecay/marginals.hpp"
#include "covdecay/simulate.hpp"

namespace covdecay {

enum class MarginalFit { normal, exponential };
enum class Distance { l1, l2 };
enum class DMode { canonical, corrected };
enum class BetaMode { generic, canonical, corrected };

MarginalFit parse_marginal_fit(const std::string& s);
Distance parse_distance(const std::string& s);
std::string to_string(Distance d);

inline constexpr std::size_t kMinSample = 30;
inline constexpr double kRhoBound = 0.999;

/// Normal: sample mean and variance. Exponential: scale = sample mean.
Marginal fit_marginal(const std::vector<double>& series, MarginalFit spec);

using PseudoPair = std::pair<double, double>;

/// (F(x_i), F(x_{i+s})) with pairs touching 0 or 1 removed.
std::vector<PseudoPair> pseudo_pairs(const std::vector<double>& series, const Marginal& marginal,
                                     std::size_t s);

/// Gaussian-copula MLE over [-0.999, 0.999].
double gaussian_copula_mle(const std::vector<PseudoPair>& pairs);

/// Same, from normal scores: n pairs, sxy = sum x y, q = sum (x^2 + y^2).
double gaussian_copula_mle_stats(double n, double sxy, double q);

/// Clamp with psi(x) = sign(x) min(0.5, |x|), then invert rho = t / (1 + t^2).
double ma1_invert(double rho1);

struct LagEstimates {
  std::vector<double> rho_hat;  // lags 1..m
  std::vector<std::size_t> pair_counts;
  std::size_t m = 0;
};

LagEstimates lag_estimates(const std::vector<double>& series, const Marginal& marginal,
                           std::size_t m);

struct EstimatorResult {
  double value = 0.0;
  /// Per-k estimates for k = 1..m (generic beta: NaN at k = 1).
  std::vector<double> trace;
  std::optional<std::pair<double, double>> ci95;
  std::optional<double> bootstrap_sd;
};

struct SearchOptions {
  Distance distance = Distance::l1;
  int scan_points = 512;
  double tol = 1e-10;
};

/// Mean over k = 1..m of argmin_d D(rho_hat[1..k], T(d) h^(2d-1)),
/// T(d) = Gamma(1-d)/Gamma(d) (canonical) or 1/Gamma(d) (corrected).
EstimatorResult estimate_d(const LagEstimates& lags, DMode mode, const SearchOptions& opt = {});

/// generic: joint search over beta in (0,1) and K in [-2,2], averaged over
/// k = 2..m. canonical/corrected: 1 - 2 d_k averaged over k = 1..m.
EstimatorResult estimate_beta(const LagEstimates& lags, BetaMode mode,
                              const SearchOptions& opt = {});

/// Geometric block length with mean `mean_block`.
std::size_t geometric_block_length(Rng& rng, double mean_block);

struct BootstrapResult {
  double point = 0.0;
  double lo95 = 0.0;
  double hi95 = 0.0;
  double sd = 0.0;
  std::size_t missing = 0;
  std::vector<double> replicates;
};

using Statistic = std::function<double(const std::vector<double>&)>;

/// Stationary bootstrap with circular wrap; percentile interval.
BootstrapResult stationary_bootstrap(const std::vector<double>& series, const Statistic& statistic,
                                     double mean_block, std::size_t replicates,
                                     std::uint64_t seed, int threads = 0);

struct EstimateOptions {
  MarginalFit marginal = MarginalFit::normal;
  /// Used instead of fitting when set.
  std::optional<Marginal> fixed_marginal;
  std::size_t m = 1;
  SearchOptions search;
  bool d_estimators = true;
  bool beta_estimators = false;
};

struct EstimateReport {
  Marginal marginal_fit;
  LagEstimates lags;
  std::optional<double> ma1_theta;
  std::optional<double> ar1_phi;
  std::optional<EstimatorResult> d_can;
  std::optional<EstimatorResult> d_cor;
  std::optional<EstimatorResult> beta_g;
  std::optional<EstimatorResult> beta_can;
  std::optional<EstimatorResult> beta_cor;
  std::vector<std::string> warnings;

  Json to_json() const;
  /// lag,rho_hat,pairs,<estimator traces...>
  std::string traces_csv() const;
};

EstimateReport estimate_pipeline(const std::vector<double>& series, const EstimateOptions& opt);

}  // namespace covdecay
