#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "covdecay/copulas.hpp"
#include "covdecay/marginals.hpp"
#include "covdecay/numerics.hpp"

namespace covdecay {

/// cov(X, Y) from Hoeffding's lemma in copula form:
///   integral of (C(u,v) - uv) / (l0(u) ln(v)) over the unit square.
double hoeffding_cov(const CopulaSpec& c, const Marginal& f0, const Marginal& fn,
                     const QuadratureGrid& grid);

struct KOptions {
  /// Empty means the family's independence anchor.
  std::vector<double> anchor;
  /// Empty means the family's lateral directions.
  std::vector<Side> lateral;
  /// Empty means the family's default mask (Mix3 holds delta fixed).
  std::vector<bool> fixed;
  /// Step for first derivatives.
  double step = 1e-4;
  /// Step for second and mixed derivatives; rounding in C - uv is
  /// amplified by 1/step^2.
  double step2 = 1e-3;
};

struct DecayConstants {
  Family family = Family::pi;
  std::vector<double> anchor;
  std::vector<bool> fixed;
  /// Gradient of the covariance in theta at the anchor; 0 for fixed coordinates.
  std::vector<double> k1;
  /// Hessian; rows and columns of fixed coordinates are 0.
  std::vector<std::vector<double>> k2;
  int grid_order = 0;
  bool degenerate = false;

  /// First free coordinate's entries, for one-parameter families.
  double k1_scalar() const;
  double k2_scalar() const;
};

DecayConstants k_constants(Family family, const Marginal& f0, const Marginal& fn,
                           const QuadratureGrid& grid, const KOptions& options = {});

struct FgmPower {
  double alpha;
  double kappa0;
};
/// Coefficients vartheta_0 .. vartheta_q.
struct MaQ {
  std::vector<double> coeffs;
};
struct Ar1 {
  double phi;
};
/// rho_n = 2^-n (1 + 0.75 n).
struct Arma21Example {};
struct ArfimaD {
  double d;
};
struct LinearProcess {
  std::vector<double> coeffs;
};
/// rho_1 .. rho_k given directly.
struct Explicit {
  std::vector<double> table;
};

/// Lag parameterization n -> theta_n (or rho_n). Validated on construction.
class DecaySchedule {
 public:
  using Kind = std::variant<FgmPower, MaQ, Ar1, Arma21Example, ArfimaD, LinearProcess, Explicit>;

  explicit DecaySchedule(Kind kind);

  /// Parse "ar1:0.5", "arfima:0.3", "ma:1,0.3", "fgm:1.5,2.25", "arma21",
  /// "linear:c0,c1,...", "explicit:r1,r2,...".
  static DecaySchedule parse(std::string_view text);
  std::string to_string() const;
  std::string kind_name() const;

  const Kind& kind() const noexcept { return kind_; }
  /// Parameter value where the copula is the independence copula.
  double anchor() const noexcept { return 0.0; }

 private:
  Kind kind_;
};

double schedule_value(const DecaySchedule& s, long long n);

/// theta_1 .. theta_count, computed incrementally.
std::vector<double> schedule_values(const DecaySchedule& s, std::size_t count);

struct PredictedCov {
  double value;
  /// 0.5 |K2| (theta_n - a)^2.
  double second_order_bound;
};

PredictedCov predicted_cov(const DecayConstants& consts, const DecaySchedule& s, long long n);

}  // namespace covdecay
