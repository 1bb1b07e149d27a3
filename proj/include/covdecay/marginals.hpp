#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace covdecay {

struct NormalParams {
  double mu = 0.0;
  double sigma = 1.0;
};

/// Scale convention: F(x) = 1 - exp(-x / lambda), mean lambda.
struct ExponentialScaleParams {
  double lambda = 1.0;
};

/// Type I extreme value (Gumbel): F(x) = exp(-exp(-(x - a) / b)).
struct EviParams {
  double a = 0.0;
  double b = 1.0;
};

/// F(x) = ((x - a) / (b - a))^2 on [a, b].
struct TriangularParams {
  double a = 0.0;
  double b = 1.0;
};

/// An absolutely continuous univariate distribution. Immutable value type;
/// parameters are validated on construction.
class Marginal {
 public:
  using Params = std::variant<NormalParams, ExponentialScaleParams, EviParams, TriangularParams>;

  Marginal() : Marginal(NormalParams{}) {}
  explicit Marginal(Params params);

  static Marginal normal(double mu, double sigma) { return Marginal(NormalParams{mu, sigma}); }
  static Marginal exponential_scale(double lambda) {
    return Marginal(ExponentialScaleParams{lambda});
  }
  /// Exponential with rate `rate`, stored as scale 1 / rate.
  static Marginal exponential_rate(double rate);
  static Marginal evi(double a, double b) { return Marginal(EviParams{a, b}); }
  static Marginal triangular(double a, double b) { return Marginal(TriangularParams{a, b}); }

  /// Build from a family name ("normal", "exp", "evi", "triangular") and a
  /// parameter list.
  static Marginal from_name(std::string_view family, const std::vector<double>& params);

  const Params& params() const noexcept { return params_; }
  std::string family_name() const;
  std::vector<double> parameter_list() const;

  double cdf(double x) const;
  /// 1 - F(x), computed without cancellation.
  double survival(double x) const;
  /// Phi^{-1}(F(x)), taken through the survival function in the upper half.
  /// Requires 0 < F(x) < 1.
  double normal_score(double x) const;
  double density(double x) const;
  /// Closed-form inverse CDF; u must lie in (0,1).
  double quantile(double u) const;
  /// l(u) = F'(F^{-1}(u)), u in (0,1).
  double hoeffding_weight(double u) const;

  bool operator==(const Marginal& other) const;

 private:
  Params params_;
};

}  // namespace covdecay
