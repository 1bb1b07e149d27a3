#include "covdecay/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "covdecay/errors.hpp"
#include "covdecay/numerics.hpp"
#include "covdecay/parallel.hpp"

namespace covdecay {

namespace {

constexpr double kDMargin = 1e-6;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double penalty(Distance dist, double r) { return dist == Distance::l1 ? std::abs(r) : r * r; }

double gaussian_loglik(double n, double sxy, double q, double rho) {
  const double s = 1.0 - rho * rho;
  return -0.5 * n * std::log(s) + (2.0 * rho * sxy - rho * rho * q) / (2.0 * s);
}

double d_scale(DMode mode, double d) {
  const double rg = reciprocal_gamma(d);
  return mode == DMode::canonical ? std::tgamma(1.0 - d) * rg : rg;
}

double mean_of(const std::vector<double>& xs, std::size_t from = 0) {
  double s = 0.0;
  std::size_t c = 0;
  for (std::size_t i = from; i < xs.size(); ++i) {
    s += xs[i];
    ++c;
  }
  return c ? s / static_cast<double>(c) : kNaN;
}

double quantile_sorted(const std::vector<double>& xs, double p) {
  const double pos = p * static_cast<double>(xs.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= xs.size()) return xs.back();
  return xs[i] + frac * (xs[i + 1] - xs[i]);
}

Json result_json(const EstimatorResult& r) {
  Json j;
  j["value"] = r.value;
  j["trace"] = r.trace;
  if (r.ci95) j["ci95"] = {r.ci95->first, r.ci95->second};
  if (r.bootstrap_sd) j["bootstrap_sd"] = *r.bootstrap_sd;
  return j;
}

}  // namespace

MarginalFit parse_marginal_fit(const std::string& s) {
  if (s == "normal" || s == "gaussian") return MarginalFit::normal;
  if (s == "exp" || s == "exponential") return MarginalFit::exponential;
  throw DomainError("unknown marginal fit '" + s + "' (expected normal or exp)");
}

Distance parse_distance(const std::string& s) {
  if (s == "l1" || s == "L1" || s == "mad") return Distance::l1;
  if (s == "l2" || s == "L2" || s == "msd") return Distance::l2;
  throw DomainError("unknown distance '" + s + "' (expected l1 or l2)");
}

std::string to_string(Distance d) { return d == Distance::l1 ? "l1" : "l2"; }

Marginal fit_marginal(const std::vector<double>& series, MarginalFit spec) {
  const std::size_t n = series.size();
  if (n < kMinSample)
    throw InsufficientDataError("fit_marginal: need at least 30 observations, got " +
                                std::to_string(n));
  for (double x : series)
    if (!std::isfinite(x)) throw DomainError("fit_marginal: series contains non-finite values");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : series) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(n - 1);
  if (!(var > 0.0)) throw DegenerateError("fit_marginal: sample variance is zero");
  if (spec == MarginalFit::normal) return Marginal::normal(mean, std::sqrt(var));
  for (double x : series)
    if (x < 0.0) throw DomainError("fit_marginal: exponential fit needs non-negative data");
  return Marginal::exponential_scale(mean);
}

std::vector<PseudoPair> pseudo_pairs(const std::vector<double>& series, const Marginal& marginal,
                                     std::size_t s) {
  if (s < 1 || s >= series.size())
    throw InsufficientDataError("pseudo_pairs: lag " + std::to_string(s) +
                                " leaves no pairs in a series of length " +
                                std::to_string(series.size()));
  std::vector<double> y(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) y[i] = marginal.cdf(series[i]);
  std::vector<PseudoPair> out;
  out.reserve(series.size() - s);
  for (std::size_t i = 0; i + s < series.size(); ++i) {
    const double a = y[i];
    const double b = y[i + s];
    if (a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) out.emplace_back(a, b);
  }
  if (out.size() < kMinSample)
    throw InsufficientDataError("pseudo_pairs: only " + std::to_string(out.size()) +
                                " pairs survive at lag " + std::to_string(s));
  return out;
}

double gaussian_copula_mle_stats(double n, double sxy, double q) {
  if (!std::isfinite(sxy) || !std::isfinite(q))
    throw EstimationError("gaussian_copula_mle: non-finite sufficient statistics");
  BracketSearch br;
  br.lo = -kRhoBound;
  br.hi = kRhoBound;
  br.tol = 1e-12;
  ScalarMinimum best;
  try {
    best = minimize_scalar([&](double r) { return -gaussian_loglik(n, sxy, q, r); }, br);
  } catch (const DomainError& e) {
    throw EstimationError(std::string("gaussian_copula_mle: ") + e.what());
  }
  double rho = best.argmin;
  if (std::abs(rho) >= kRhoBound) return std::copysign(kRhoBound, rho);
  // Newton polish on the score n r (1 - r^2) + sxy (1 + r^2) - r q. The
  // log-likelihood is too flat at the peak to arbitrate between candidates.
  for (int it = 0; it < 8; ++it) {
    const double g = n * rho * (1.0 - rho * rho) + sxy * (1.0 + rho * rho) - rho * q;
    const double dg = n * (1.0 - 3.0 * rho * rho) + 2.0 * sxy * rho - q;
    if (!(dg < 0.0)) break;
    const double next = rho - g / dg;
    if (!(std::abs(next - rho) < 1e-6) || std::abs(next) > kRhoBound) break;
    if (std::abs(next - rho) <= 4.0 * std::numeric_limits<double>::epsilon()) return next;
    rho = next;
  }
  return best.argmin;
}

double gaussian_copula_mle(const std::vector<PseudoPair>& pairs) {
  if (pairs.size() < kMinSample)
    throw InsufficientDataError("gaussian_copula_mle: need at least 30 pairs");
  double sxy = 0.0;
  double q = 0.0;
  for (const auto& [u, v] : pairs) {
    const double x = norm_quantile(u);
    const double y = norm_quantile(v);
    sxy += x * y;
    q += x * x + y * y;
  }
  return gaussian_copula_mle_stats(static_cast<double>(pairs.size()), sxy, q);
}

double ma1_invert(double rho1) {
  if (!std::isfinite(rho1)) throw DomainError("ma1_invert: non-finite argument");
  if (rho1 == 0.0) return 0.0;
  const double psi = std::copysign(std::min(0.5, std::abs(rho1)), rho1);
  return (1.0 - std::sqrt(std::max(0.0, 1.0 - 4.0 * psi * psi))) / (2.0 * psi);
}

LagEstimates lag_estimates(const std::vector<double>& series, const Marginal& marginal,
                           std::size_t m) {
  const std::size_t n = series.size();
  if (m < 1) throw DomainError("lag_estimates: m must be at least 1");
  if (m >= n) throw InsufficientDataError("lag_estimates: m must be smaller than the series length");
  std::vector<double> z(n, kNaN);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = marginal.cdf(series[i]);
    if (y > 0.0 && y < 1.0) z[i] = marginal.normal_score(series[i]);
  }
  LagEstimates out;
  out.m = m;
  out.rho_hat.resize(m);
  out.pair_counts.resize(m);
  for (std::size_t s = 1; s <= m; ++s) {
    double sxy = 0.0;
    double q = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i + s < n; ++i) {
      const double a = z[i];
      const double b = z[i + s];
      if (std::isnan(a) || std::isnan(b)) continue;
      sxy += a * b;
      q += a * a + b * b;
      ++count;
    }
    if (count < kMinSample)
      throw InsufficientDataError("lag_estimates: only " + std::to_string(count) +
                                  " pairs survive at lag " + std::to_string(s));
    out.pair_counts[s - 1] = count;
    out.rho_hat[s - 1] = gaussian_copula_mle_stats(static_cast<double>(count), sxy, q);
  }
  return out;
}

EstimatorResult estimate_d(const LagEstimates& lags, DMode mode, const SearchOptions& opt) {
  const std::size_t m = lags.rho_hat.size();
  if (m < 1) throw DomainError("estimate_d: need at least one lag");
  if (opt.scan_points < 2) throw DomainError("estimate_d: scan_points must be at least 2");
  const std::vector<double>& rho = lags.rho_hat;
  const double lo = -0.5 + kDMargin;
  const double hi = 0.5 - kDMargin;
  const std::size_t g = static_cast<std::size_t>(opt.scan_points);
  const double step = (hi - lo) / static_cast<double>(g - 1);

  std::vector<double> log_h(m + 1, 0.0);
  for (std::size_t h = 1; h <= m; ++h) log_h[h] = std::log(static_cast<double>(h));
  std::vector<double> grid(g);
  std::vector<double> scale(g);
  for (std::size_t i = 0; i < g; ++i) {
    grid[i] = i + 1 == g ? hi : lo + step * static_cast<double>(i);
    scale[i] = d_scale(mode, grid[i]);
  }
  auto model = [&](double t, double d, std::size_t h) {
    return t * std::exp((2.0 * d - 1.0) * log_h[h]);
  };

  EstimatorResult out;
  out.trace.reserve(m);
  std::vector<double> cum(g, 0.0);
  for (std::size_t k = 1; k <= m; ++k) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < g; ++i) {
      cum[i] += penalty(opt.distance, rho[k - 1] - model(scale[i], grid[i], k));
      if (cum[i] < cum[best]) best = i;
    }
    const double kk = static_cast<double>(k);
    auto objective = [&](double d) {
      const double t = d_scale(mode, d);
      double s = 0.0;
      for (std::size_t h = 1; h <= k; ++h) s += penalty(opt.distance, rho[h - 1] - model(t, d, h));
      return s / kk;
    };
    BracketSearch br;
    br.lo = best == 0 ? lo : grid[best - 1];
    br.hi = best + 1 == g ? hi : grid[best + 1];
    br.tol = opt.tol;
    br.scan_points = 0;
    double dk = grid[best];
    try {
      const ScalarMinimum refined = minimize_scalar(objective, br);
      if (refined.min_value <= cum[best] / kk) dk = refined.argmin;
    } catch (const ConvergenceError& e) {
      throw EstimationError(std::string("estimate_d: ") + e.what() + " at k = " +
                                std::to_string(k),
                            out.trace);
    }
    out.trace.push_back(dk);
  }
  out.value = mean_of(out.trace);
  return out;
}

EstimatorResult estimate_beta(const LagEstimates& lags, BetaMode mode, const SearchOptions& opt) {
  if (mode != BetaMode::generic) {
    EstimatorResult d =
        estimate_d(lags, mode == BetaMode::canonical ? DMode::canonical : DMode::corrected, opt);
    for (double& x : d.trace) x = 1.0 - 2.0 * x;
    d.value = mean_of(d.trace);
    return d;
  }
  const std::size_t m = lags.rho_hat.size();
  if (m < 2) throw DomainError("estimate_beta: generic mode needs m >= 2");
  if (opt.scan_points < 2) throw DomainError("estimate_beta: scan_points must be at least 2");
  const std::vector<double>& rho = lags.rho_hat;
  std::vector<double> log_i(m + 1, 0.0);
  for (std::size_t i = 1; i <= m; ++i) log_i[i] = std::log(static_cast<double>(i));

  // For fixed beta the objective is piecewise linear (L1) or quadratic (L2)
  // in K; a bracketed search over K in [-2, 2] handles both.
  auto fit = [&](double beta, double kk, std::size_t k) {
    double s = 0.0;
    for (std::size_t i = 1; i <= k; ++i)
      s += penalty(opt.distance, rho[i - 1] - kk * std::exp(-beta * log_i[i]));
    return s / static_cast<double>(k);
  };
  auto profile = [&](double beta, std::size_t k) {
    BracketSearch kb;
    kb.lo = -2.0;
    kb.hi = 2.0;
    kb.tol = opt.tol;
    kb.scan_points = opt.scan_points;
    return minimize_scalar([&](double kk) { return fit(beta, kk, k); }, kb).min_value;
  };

  EstimatorResult out;
  out.trace.assign(1, kNaN);
  for (std::size_t k = 2; k <= m; ++k) {
    BracketSearch br;
    br.lo = kDMargin;
    br.hi = 1.0 - kDMargin;
    br.tol = opt.tol;
    br.scan_points = opt.scan_points;
    try {
      out.trace.push_back(minimize_scalar([&](double b) { return profile(b, k); }, br).argmin);
    } catch (const ConvergenceError& e) {
      throw EstimationError(std::string("estimate_beta: ") + e.what() + " at k = " +
                                std::to_string(k),
                            out.trace);
    }
  }
  out.value = mean_of(out.trace, 1);
  return out;
}

std::size_t geometric_block_length(Rng& rng, double mean_block) {
  if (!(mean_block >= 1.0)) throw DomainError("mean block length must be at least 1");
  if (mean_block == 1.0) return 1;
  const double p = 1.0 / mean_block;
  return 1 + static_cast<std::size_t>(std::floor(std::log(rng.uniform()) / std::log1p(-p)));
}

BootstrapResult stationary_bootstrap(const std::vector<double>& series, const Statistic& statistic,
                                     double mean_block, std::size_t replicates,
                                     std::uint64_t seed, int threads) {
  const std::size_t n = series.size();
  if (n < 2) throw InsufficientDataError("stationary_bootstrap: series too short");
  if (replicates < 100) throw DomainError("stationary_bootstrap: need at least 100 replicates");
  if (!(mean_block >= 1.0)) throw DomainError("stationary_bootstrap: mean_block must be >= 1");

  BootstrapResult out;
  out.point = statistic(series);
  std::vector<double> values(replicates, kNaN);
  parallel_for(replicates, resolve_threads(threads), [&](std::size_t b) {
    Rng rng(derive_seed(seed, b));
    std::vector<double> sample(n);
    for (int attempt = 0; attempt < 2; ++attempt) {
      std::size_t filled = 0;
      while (filled < n) {
        std::size_t start = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
        if (start >= n) start = n - 1;
        const std::size_t len = geometric_block_length(rng, mean_block);
        for (std::size_t j = 0; j < len && filled < n; ++j) sample[filled++] = series[(start + j) % n];
      }
      try {
        const double v = statistic(sample);
        if (std::isfinite(v)) {
          values[b] = v;
          return;
        }
      } catch (const Error&) {
      }
    }
  });
  std::vector<double> ok;
  ok.reserve(replicates);
  for (double v : values)
    if (std::isfinite(v)) ok.push_back(v);
  out.missing = replicates - ok.size();
  if (static_cast<double>(out.missing) > 0.05 * static_cast<double>(replicates))
    throw BootstrapError("stationary_bootstrap: " + std::to_string(out.missing) + " of " +
                         std::to_string(replicates) + " replicates failed");
  out.replicates = values;
  std::sort(ok.begin(), ok.end());
  out.lo95 = quantile_sorted(ok, 0.025);
  out.hi95 = quantile_sorted(ok, 0.975);
  const double mu = mean_of(ok);
  double ss = 0.0;
  for (double v : ok) ss += (v - mu) * (v - mu);
  out.sd = ok.size() > 1 ? std::sqrt(ss / static_cast<double>(ok.size() - 1)) : 0.0;
  return out;
}

EstimateReport estimate_pipeline(const std::vector<double>& series, const EstimateOptions& opt) {
  EstimateReport rep;
  if (series.size() < 500)
    rep.warnings.push_back("series has " + std::to_string(series.size()) +
                           " observations; estimates below 500 are unreliable");
  rep.marginal_fit = opt.fixed_marginal ? *opt.fixed_marginal : fit_marginal(series, opt.marginal);
  rep.lags = lag_estimates(series, rep.marginal_fit, opt.m);
  rep.ar1_phi = rep.lags.rho_hat[0];
  rep.ma1_theta = ma1_invert(rep.lags.rho_hat[0]);
  if (opt.d_estimators || opt.beta_estimators) {
    rep.d_can = estimate_d(rep.lags, DMode::canonical, opt.search);
    rep.d_cor = estimate_d(rep.lags, DMode::corrected, opt.search);
  }
  if (opt.beta_estimators) {
    auto to_beta = [](EstimatorResult d) {
      for (double& x : d.trace) x = 1.0 - 2.0 * x;
      d.value = 1.0 - 2.0 * d.value;
      d.ci95.reset();
      d.bootstrap_sd.reset();
      return d;
    };
    rep.beta_can = to_beta(*rep.d_can);
    rep.beta_cor = to_beta(*rep.d_cor);
    if (opt.m >= 2) rep.beta_g = estimate_beta(rep.lags, BetaMode::generic, opt.search);
  }
  return rep;
}

Json EstimateReport::to_json() const {
  Json j;
  j["marginal_fit"] = covdecay::to_json(marginal_fit);
  Json l;
  l["m"] = lags.m;
  l["rho_hat"] = lags.rho_hat;
  l["pair_counts"] = lags.pair_counts;
  j["lag_estimates"] = l;
  if (ar1_phi) j["ar1_phi"] = *ar1_phi;
  if (ma1_theta) j["ma1_theta"] = *ma1_theta;
  Json est = Json::object();
  if (d_can) est["d_can"] = result_json(*d_can);
  if (d_cor) est["d_cor"] = result_json(*d_cor);
  if (beta_g) est["beta_g"] = result_json(*beta_g);
  if (beta_can) est["beta_can"] = result_json(*beta_can);
  if (beta_cor) est["beta_cor"] = result_json(*beta_cor);
  j["estimators"] = est;
  j["warnings"] = warnings;
  return j;
}

std::string EstimateReport::traces_csv() const {
  std::vector<std::pair<std::string, const EstimatorResult*>> cols;
  if (d_can) cols.emplace_back("d_can", &*d_can);
  if (d_cor) cols.emplace_back("d_cor", &*d_cor);
  if (beta_g) cols.emplace_back("beta_g", &*beta_g);
  if (beta_can) cols.emplace_back("beta_can", &*beta_can);
  if (beta_cor) cols.emplace_back("beta_cor", &*beta_cor);
  std::string out = "lag,rho_hat,pairs";
  for (const auto& c : cols) out += "," + c.first;
  out += '\n';
  char buf[64];
  for (std::size_t k = 0; k < lags.rho_hat.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%zu", k + 1, lags.rho_hat[k], lags.pair_counts[k]);
    out += buf;
    for (const auto& c : cols) {
      const double v = k < c.second->trace.size() ? c.second->trace[k] : kNaN;
      if (std::isfinite(v)) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        out += buf;
      } else {
        out += ",";
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace covdecay
