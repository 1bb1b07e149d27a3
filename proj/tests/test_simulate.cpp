#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "covdecay/errors.hpp"
#include "covdecay/estimate.hpp"
#include "covdecay/simulate.hpp"

using namespace covdecay;
using doctest::Approx;

namespace {

double lag1_acf(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - m) * (x[i] - m);
    if (i + 1 < x.size()) num += (x[i] - m) * (x[i + 1] - m);
  }
  return num / den;
}

/// Kolmogorov-Smirnov distance of a sample from Uniform(0,1).
double ks_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    d = std::max({d, (i + 1) / n - u[i], u[i] - i / n});
  return d;
}

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  long long s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double p = (x[i] - x[j]) * (y[i] - y[j]);
      s += (p > 0) - (p < 0);
    }
  const double n = static_cast<double>(x.size());
  return 2.0 * static_cast<double>(s) / (n * (n - 1));
}

PathConfig config(std::size_t n, DecaySchedule s, Marginal m, std::uint64_t seed) {
  PathConfig c;
  c.n = n;
  c.schedule = std::move(s);
  c.marginal = m;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("rng and seed derivation") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform());
  }
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(7, i));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
  CHECK(derive_seed(7, 3) != derive_seed(8, 3));
  Rng c(1);
  CHECK(c.normal() == Approx(norm_quantile(Rng(1).uniform())));
}

TEST_CASE("gaussian_path independence") {
  const std::size_t n = 2000;
  for (const Marginal& m : {Marginal::normal(0, 1), Marginal::exponential_scale(2), Marginal::evi(0, 1)}) {
    const SeriesPath p = gaussian_path(config(n, DecaySchedule(Ar1{0.0}), m, 11));
    CHECK(p.cholesky_ok);
    REQUIRE(p.values.size() == n);
    CHECK(std::abs(lag1_acf(p.values)) < 3.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("gaussian_path arfima lag-one correlation") {
  // The demeaned sample ACF of one path is biased low under long memory
  // (200-path pilot: mean 0.560, sd 0.050), so lag-one products are pooled
  // over paths with the known mean.
  PathConfig c = config(1000, DecaySchedule(ArfimaD{0.4}), Marginal::normal(0, 1), 0);
  const GaussianPathSampler sampler(c.schedule, c.n);
  double cross = 0.0;
  double sq = 0.0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    c.seed = derive_seed(5, r);
    const auto x = sampler.sample(c).values;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) cross += x[i] * x[i + 1];
    for (std::size_t i = 0; i + 1 < x.size(); ++i) sq += x[i] * x[i];
  }
  CHECK(std::abs(cross / sq - 0.4 / 0.6) < 0.1);
  CHECK(std::abs(cross / sq - 0.4 / 0.6) < 0.03);
}

TEST_CASE("gaussian_path ma1 recovered by the pipeline") {
  const SeriesPath p = gaussian_path(config(400, DecaySchedule(MaQ{{1.0, 0.3}}), Marginal::normal(0, 1), 2024));
  const Marginal fit = fit_marginal(p.values, MarginalFit::normal);
  const LagEstimates le = lag_estimates(p.values, fit, 1);
  CHECK(std::abs(ma1_invert(le.rho_hat[0]) - 0.3) < 0.15);
}

TEST_CASE("gaussian_path determinism") {
  const PathConfig c = config(300, DecaySchedule(ArfimaD{0.3}), Marginal::exponential_scale(1), 99);
  const SeriesPath a = gaussian_path(c);
  const SeriesPath b = gaussian_path(c);
  CHECK(a.values == b.values);
  CHECK(path_to_csv(a) == path_to_csv(b));
  const GaussianPathSampler sampler(c.schedule, c.n);
  CHECK(sampler.sample(c).values == a.values);
  PathConfig d = c;
  d.seed = 100;
  CHECK(gaussian_path(d).values != a.values);
}

TEST_CASE("gaussian_path normal marginal is an affine map of the latent path") {
  const PathConfig c = config(64, DecaySchedule(Ar1{0.6}), Marginal::normal(3, 2), 8);
  const GaussianPathSampler sampler(c.schedule, c.n);
  const auto z = sampler.latent(c.seed);
  const auto x = sampler.sample(c).values;
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(x[i] == Approx(3 + 2 * z[i]).epsilon(1e-14));
}

TEST_CASE("gaussian_path definiteness error names the minor") {
  try {
    gaussian_path(config(5, DecaySchedule(Explicit{{0.9, 0.0, 0.0, 0.0}}), Marginal::normal(0, 1), 1));
    FAIL("expected DefinitenessError");
  } catch (const DefinitenessError& e) {
    // det of the leading 3x3 block is 1 - 2 * 0.81 < 0
    CHECK(e.minor() == 3);
  }
  CHECK_THROWS_AS(gaussian_path(config(1, DecaySchedule(Ar1{0.2}), Marginal::normal(0, 1), 1)), DomainError);
}

TEST_CASE("gaussian_path lag-one copula parameter") {
  const SeriesPath p = gaussian_path(config(5000, DecaySchedule(Ar1{0.5}), Marginal::normal(0, 1), 77));
  const Marginal fit = fit_marginal(p.values, MarginalFit::normal);
  const double rho = gaussian_copula_mle(pseudo_pairs(p.values, fit, 1));
  CHECK(std::abs(rho - 0.5) < 0.03);
}

TEST_CASE("marginals are exact for both generators") {
  // the middle coordinate of 1e4 independent paths is an iid sample of F
  const std::size_t reps = 10000;
  const double crit = 1.628 / std::sqrt(static_cast<double>(reps));  // 1% level
  {
    const Marginal m = Marginal::exponential_scale(2);
    PathConfig c = config(50, DecaySchedule(ArfimaD{0.3}), m, 0);
    const GaussianPathSampler sampler(c.schedule, c.n);
    std::vector<double> u;
    for (std::size_t r = 0; r < reps; ++r) {
      c.seed = derive_seed(5, r);
      u.push_back(m.cdf(sampler.sample(c).values[25]));
    }
    CHECK(ks_uniform(u) < crit);
  }
  {
    const Marginal m = Marginal::evi(0, 1);
    PathConfig c = config(50, DecaySchedule(FgmPower{1.5, fgm_min_kappa(50, 1.5)}), m, 0);
    std::vector<double> u;
    for (std::size_t r = 0; r < reps; ++r) {
      c.seed = derive_seed(6, r);
      u.push_back(m.cdf(fgm_path(c).values[25]));
    }
    CHECK(ks_uniform(u) < crit);
  }
}

TEST_CASE("fgm_min_kappa") {
  CHECK(fgm_min_kappa(3, 2.0) == Approx(2.25));
  CHECK(fgm_min_kappa(2, 1.3) == Approx(1.0));
  CHECK(fgm_min_kappa(2, 7.0) == Approx(1.0));
  CHECK(fgm_min_kappa(4, 2.0) == Approx(3.0 + 0.5 + 1.0 / 9.0));
}

TEST_CASE("fgm_path near independence matches independent inversion") {
  const Marginal m = Marginal::evi(0, 1);
  const SeriesPath p = fgm_path(config(2, DecaySchedule(FgmPower{2.0, 1e300}), m, 31));
  Rng rng(31);
  for (double x : p.values) CHECK(x == Approx(m.quantile(rng.uniform())).epsilon(1e-14));
}

TEST_CASE("fgm_path per-index marginals and diagnostics") {
  PathConfig c = config(6, DecaySchedule(FgmPower{2.0, fgm_min_kappa(6, 2.0)}), Marginal::evi(0, 1), 4);
  for (std::size_t k = 0; k < 6; ++k) c.marginals.push_back(Marginal::evi(static_cast<double>(k) * 10.0, 1.0));
  const SeriesPath p = fgm_path(c);
  for (std::size_t k = 0; k < 6; ++k) {
    const double u = c.marginals[k].cdf(p.values[k]);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
  CHECK(p.min_conditional_density > 0.0);
  CHECK(p.min_conditional_density <= 1.0);
  c.marginals.pop_back();
  CHECK_THROWS_AS(fgm_path(c), DomainError);
  CHECK_THROWS_AS(fgm_path(config(6, DecaySchedule(Ar1{0.1}), Marginal::evi(0, 1), 4)), DomainError);
}

TEST_CASE("fgm_path reports a negative conditional density") {
  const PathConfig c =
      config(1000, DecaySchedule(FgmPower{2.0, riemann_zeta(2.0)}), Marginal::evi(0, 1), 9);
  try {
    fgm_path(c);
    FAIL("expected ValidityError");
  } catch (const ValidityError& e) {
    CHECK(std::string(e.what()).find("fgm_min_kappa") != std::string::npos);
  }
}

TEST_CASE("fgm_path degenerates to independence for large kappa0") {
  const std::size_t reps = 2000;
  PathConfig c = config(5, DecaySchedule(FgmPower{1.5, 1e6}), Marginal::evi(0, 1), 0);
  std::vector<std::vector<double>> cols(5);
  for (std::size_t r = 0; r < reps; ++r) {
    c.seed = derive_seed(12, r);
    const SeriesPath p = fgm_path(c);
    for (std::size_t k = 0; k < 5; ++k) cols[k].push_back(p.values[k]);
  }
  const double n = static_cast<double>(reps);
  const double se = std::sqrt(2.0 * (2.0 * n + 5.0) / (9.0 * n * (n - 1.0)));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i + 1; j < 5; ++j) CHECK(std::abs(kendall_tau(cols[i], cols[j])) < 4.0 * se);
}

TEST_CASE("path csv layout") {
  const SeriesPath p = gaussian_path(config(3, DecaySchedule(Ar1{0.2}), Marginal::normal(0, 1), 1));
  const std::string csv = path_to_csv(p);
  CHECK(csv.rfind("# {", 0) == 0);
  const std::size_t nl = csv.find('\n');
  const Json meta = Json::parse(csv.substr(2, nl - 2));
  CHECK(meta["n"] == 3);
  CHECK(meta["seed"] == 1);
  CHECK(meta["schedule"]["kind"] == "ar1");
  CHECK(csv.substr(nl + 1, 12) == "index,value\n");
  CHECK(csv.find("\n1,") != std::string::npos);
  CHECK(csv.find("\n3,") != std::string::npos);
}

TEST_CASE("fgm_density") {
  const DecaySchedule s(FgmPower{2.0, 2.25});
  CHECK(fgm_density(s, {0.1, 0.5, 0.9}) == Approx(1.0 - 0.64 / 9.0));
  // 1 + (1/2.25)(0.8)(0.6) + (0.25/2.25)(0.8)(-0.2) + (1/2.25)(0.6)(-0.2)
  CHECK(fgm_density(s, {0.1, 0.2, 0.6}) == Approx(1.0 + (0.48 - 0.04 - 0.12) / 2.25));
  CHECK(fgm_density(s, {0.0, 0.0, 0.0}) >= 0.0);
  CHECK_THROWS_AS(fgm_density(DecaySchedule(Ar1{0.1}), {0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(fgm_density(s, {0.5, 1.5}), DomainError);
}
