#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "covdecay/decay.hpp"
#include "covdecay/marginals.hpp"

namespace covdecay {

/// 64-bit Mersenne Twister with inverse-CDF normals, so variate streams
/// depend only on the seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform on (0,1), never 0 or 1.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double normal();
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer of (base, index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

struct PathConfig {
  std::size_t n = 0;
  DecaySchedule schedule{Ar1{0.0}};
  Marginal marginal;
  /// Per-index marginals (FGM construction); empty means `marginal` for all.
  std::vector<Marginal> marginals;
  std::uint64_t seed = 0;

  const Marginal& marginal_at(std::size_t k) const {
    return marginals.empty() ? marginal : marginals.at(k);
  }
};

struct SeriesPath {
  std::vector<double> values;
  PathConfig config;
  bool cholesky_ok = false;
  /// Smallest conditional density met by the FGM sampler (NaN otherwise).
  double min_conditional_density = std::numeric_limits<double>::quiet_NaN();
};

/// Cholesky factor of the Toeplitz correlation matrix of a schedule, reused
/// across paths that share (schedule, n).
class GaussianPathSampler {
 public:
  GaussianPathSampler(const DecaySchedule& schedule, std::size_t n);
  ~GaussianPathSampler();
  GaussianPathSampler(GaussianPathSampler&&) noexcept;
  GaussianPathSampler& operator=(GaussianPathSampler&&) noexcept;

  std::size_t size() const noexcept { return n_; }
  /// Latent correlated standard normals z = L eps.
  std::vector<double> latent(std::uint64_t seed) const;
  SeriesPath sample(const PathConfig& cfg) const;

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

SeriesPath gaussian_path(const PathConfig& cfg);

/// Sequential exact sampler for the n-dimensional FGM construction with
/// theta_h = h^-alpha / kappa0. Requires an FgmPower schedule.
SeriesPath fgm_path(const PathConfig& cfg);

/// Joint density 1 + sum_{i<j} theta_{j-i} (1 - 2u_i)(1 - 2u_j) of the
/// n-dimensional FGM construction. Requires an FgmPower schedule.
double fgm_density(const DecaySchedule& schedule, const std::vector<double>& u);

/// sum_{h=1}^{n-1} (n - h) h^-alpha.
double fgm_min_kappa(std::size_t n, double alpha);

/// CSV with a '# {json}' header line and 'index,value' rows.
std::string path_to_csv(const SeriesPath& path);

}  // namespace covdecay
