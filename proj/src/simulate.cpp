#include "covdecay/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "covdecay/errors.hpp"
#include "covdecay/json_io.hpp"
#include "covdecay/numerics.hpp"

namespace covdecay {

double Rng::normal() { return norm_quantile(uniform()); }

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

Eigen::MatrixXd toeplitz(const std::vector<double>& rho, std::size_t n) {
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m(i, j) = i == j ? 1.0 : rho[(i > j ? i - j : j - i) - 1];
  return m;
}

/// Order of the first leading principal minor that is not positive definite.
std::size_t first_failing_minor(const Eigen::MatrixXd& omega) {
  std::size_t lo = 1;
  std::size_t hi = static_cast<std::size_t>(omega.rows());
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    Eigen::LLT<Eigen::MatrixXd> llt(omega.topLeftCorner(mid, mid));
    if (llt.info() == Eigen::Success)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

double to_marginal(const Marginal& m, double z) {
  if (const auto* p = std::get_if<NormalParams>(&m.params())) return p->mu + p->sigma * z;
  double u = norm_cdf(z);
  u = std::clamp(u, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
  return m.quantile(u);
}

}  // namespace

struct GaussianPathSampler::Impl {
  Eigen::MatrixXd lower;
};

GaussianPathSampler::GaussianPathSampler(const DecaySchedule& schedule, std::size_t n)
    : n_(n), impl_(std::make_unique<Impl>()) {
  if (n < 2) throw DomainError("gaussian_path: length must be at least 2");
  const std::vector<double> rho = schedule_values(schedule, n - 1);
  for (double r : rho)
    if (!(r > -1.0 && r < 1.0)) throw DomainError("gaussian_path: schedule emits |rho| >= 1");
  const Eigen::MatrixXd omega = toeplitz(rho, n);
  Eigen::LLT<Eigen::MatrixXd> llt(omega);
  if (llt.info() != Eigen::Success) {
    const std::size_t minor = first_failing_minor(omega);
    throw DefinitenessError("correlation matrix of schedule " + schedule.to_string() +
                                " is not positive definite: leading minor of order " +
                                std::to_string(minor) + " fails",
                            minor);
  }
  impl_->lower = llt.matrixL();
}

GaussianPathSampler::~GaussianPathSampler() = default;
GaussianPathSampler::GaussianPathSampler(GaussianPathSampler&&) noexcept = default;
GaussianPathSampler& GaussianPathSampler::operator=(GaussianPathSampler&&) noexcept = default;

std::vector<double> GaussianPathSampler::latent(std::uint64_t seed) const {
  Rng rng(seed);
  Eigen::VectorXd eps(static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < n_; ++i) eps(static_cast<Eigen::Index>(i)) = rng.normal();
  const Eigen::VectorXd z = impl_->lower.triangularView<Eigen::Lower>() * eps;
  return {z.data(), z.data() + z.size()};
}

SeriesPath GaussianPathSampler::sample(const PathConfig& cfg) const {
  if (cfg.n != n_) throw DomainError("GaussianPathSampler: length mismatch");
  SeriesPath out;
  out.config = cfg;
  out.cholesky_ok = true;
  out.values = latent(cfg.seed);
  for (std::size_t k = 0; k < n_; ++k) out.values[k] = to_marginal(cfg.marginal_at(k), out.values[k]);
  return out;
}

SeriesPath gaussian_path(const PathConfig& cfg) {
  return GaussianPathSampler(cfg.schedule, cfg.n).sample(cfg);
}

double fgm_density(const DecaySchedule& schedule, const std::vector<double>& u) {
  if (!std::holds_alternative<FgmPower>(schedule.kind()))
    throw DomainError("fgm_density: requires an FgmPower schedule");
  for (double x : u)
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("fgm_density: coordinates must lie in [0,1]");
  double c = 1.0;
  for (std::size_t j = 1; j < u.size(); ++j)
    for (std::size_t i = 0; i < j; ++i)
      c += schedule_value(schedule, static_cast<long long>(j - i)) * (1.0 - 2.0 * u[i]) * (1.0 - 2.0 * u[j]);
  return c;
}

double fgm_min_kappa(std::size_t n, double alpha) {
  if (n < 2) throw DomainError("fgm_min_kappa: n must be at least 2");
  if (!(alpha > 1.0)) throw DomainError("fgm_min_kappa: alpha must exceed 1");
  double s = 0.0;
  for (std::size_t h = n - 1; h >= 1; --h)
    s += static_cast<double>(n - h) * std::pow(static_cast<double>(h), -alpha);
  return s;
}

SeriesPath fgm_path(const PathConfig& cfg) {
  const auto* sched = std::get_if<FgmPower>(&cfg.schedule.kind());
  if (!sched) throw DomainError("fgm_path: requires an FgmPower schedule");
  const std::size_t n = cfg.n;
  if (n < 2) throw DomainError("fgm_path: length must be at least 2");
  if (!cfg.marginals.empty() && cfg.marginals.size() != n)
    throw DomainError("fgm_path: per-index marginal list must have length n");

  std::vector<double> theta(n);
  for (std::size_t h = 1; h < n; ++h) theta[h] = schedule_value(cfg.schedule, static_cast<long long>(h));

  Rng rng(cfg.seed);
  std::vector<double> s(n);  // 1 - 2 u_i
  double a = 0.0;            // sum over i < j < k of theta_{j-i} s_i s_j
  double min_density = 1.0;
  SeriesPath out;
  out.config = cfg;
  out.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double b_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) b_sum += theta[k - i] * s[i];
    const double denom = 1.0 + a;
    const double b = k == 0 ? 0.0 : b_sum / denom;
    if (!(denom > 0.0) || std::abs(b) > 1.0 + 1e-12) {
      std::ostringstream os;
      os << "fgm_path: negative conditional density at index " << k << " (kappa0 = "
         << sched->kappa0 << "); use kappa0 >= fgm_min_kappa(" << n << ", " << sched->alpha
         << ") = " << fgm_min_kappa(n, sched->alpha);
      throw ValidityError(os.str());
    }
    min_density = std::min(min_density, 1.0 - std::abs(b));
    // Conditional cdf w = u + b u (1 - u).
    const double w = rng.uniform();
    const double bp = 1.0 + b;
    double u = 2.0 * w / (bp + std::sqrt(std::max(bp * bp - 4.0 * b * w, 0.0)));
    u = std::clamp(u, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
    s[k] = 1.0 - 2.0 * u;
    a += b_sum * s[k];
    out.values[k] = cfg.marginal_at(k).quantile(u);
  }
  out.min_conditional_density = min_density;
  return out;
}

std::string path_to_csv(const SeriesPath& path) {
  Json meta;
  meta["n"] = path.config.n;
  meta["schedule"] = to_json(path.config.schedule);
  if (path.config.marginals.empty()) {
    meta["marginal"] = to_json(path.config.marginal);
  } else {
    Json list = Json::array();
    for (const auto& m : path.config.marginals) list.push_back(to_json(m));
    meta["marginals"] = list;
  }
  meta["seed"] = path.config.seed;
  meta["cholesky_ok"] = path.cholesky_ok;
  if (std::isfinite(path.min_conditional_density))
    meta["min_conditional_density"] = path.min_conditional_density;
  std::string out = "# " + dump_json(meta) + "\nindex,value\n";
  char buf[64];
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, path.values[i]);
    out += buf;
  }
  return out;
}

}  // namespace covdecay
