#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "covdecay/numerics.hpp"

namespace covdecay {

enum class Family {
  fgm,
  amh,
  gumbel_barnett,
  frank,
  gaussian,
  tawn_mixed,
  euclidean,
  mix3,  // alpha * FGM(gamma) + (1 - alpha) * Euclidean(delta); theta = (gamma, alpha, delta)
  pi,
  w,
  m,
};

std::string family_name(Family f);
Family parse_family(std::string_view name);

/// Bounds of one coordinate of the parameter space.
struct ParamBounds {
  double lo;
  double hi;
  bool lo_open;
  bool hi_open;
};

/// Parameter-space metadata. `anchor` is the independence point; `lateral`
/// gives the side from which each coordinate approaches it.
struct FamilyTraits {
  Family family;
  std::vector<std::string> param_names;
  std::vector<ParamBounds> bounds;
  std::vector<double> anchor;
  std::vector<Side> lateral;
  /// Coordinates held fixed by default when differentiating at the anchor.
  std::vector<bool> fixed;
};

const FamilyTraits& family_traits(Family f);

/// A family plus parameter vector. Construction validates theta against the
/// closure of the family's parameter space; boundary points that are limits
/// (Frank and Gumbel-Barnett at 0) evaluate as the limiting copula.
class CopulaSpec {
 public:
  CopulaSpec(Family family, std::vector<double> theta);
  CopulaSpec(Family family, double theta) : CopulaSpec(family, std::vector<double>{theta}) {}
  explicit CopulaSpec(Family family) : CopulaSpec(family, std::vector<double>{}) {}

  Family family() const noexcept { return family_; }
  const std::vector<double>& theta() const noexcept { return theta_; }
  double theta(std::size_t i) const { return theta_.at(i); }

  /// Copy with coordinate i replaced (validated).
  CopulaSpec with(std::size_t i, double value) const;

  bool operator==(const CopulaSpec&) const = default;

 private:
  Family family_;
  std::vector<double> theta_;
};

/// Domain of coordinate i as an Interval for finite differences. Open
/// bounds are pulled inside by a tiny margin.
Interval parameter_interval(Family f, std::size_t i);

double copula_cdf(const CopulaSpec& c, double u, double v);

/// Closed form for FGM, Gaussian and Pi; otherwise a central mixed
/// difference of the cdf with step 1e-5.
double copula_density(const CopulaSpec& c, double u, double v);

/// Derivative of C_theta(u,v) in theta_i (order 1 or 2); for order 2 with
/// j != i, the mixed derivative in (theta_i, theta_j). j < 0 means j = i.
double dtheta_cdf(const CopulaSpec& c, std::size_t i, double u, double v, int order, int j = -1);

inline constexpr double kThetaStep = 1e-4;
inline constexpr double kDensityStep = 1e-5;

}  // namespace covdecay
