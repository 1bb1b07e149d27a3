#pragma once

// Reference computations used to derive expected values in the tests. They
// share no code with the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

/// Gamma via upward recurrence to z >= 20 and the Stirling series.
inline long double gamma(long double x) {
  long double shift = 1.0L;
  while (x < 20.0L) {
    shift *= x;
    x += 1.0L;
  }
  const long double z = x;
  const long double z2 = z * z;
  const long double series = 1.0L / (12.0L * z) - 1.0L / (360.0L * z * z2) +
                             1.0L / (1260.0L * z * z2 * z2) -
                             1.0L / (1680.0L * z * z2 * z2 * z2);
  const long double lg =
      (z - 0.5L) * std::log(z) - z + 0.5L * std::log(2.0L * std::numbers::pi_v<long double>) + series;
  return std::exp(lg) / shift;
}

/// sum k^-s for k <= n, plus the Euler-Maclaurin tail to second order.
inline long double zeta(long double s, long n = 200000) {
  long double sum = 0.0L;
  for (long k = n; k >= 1; --k) sum += std::pow(static_cast<long double>(k), -s);
  const long double N = static_cast<long double>(n);
  sum += std::pow(N, 1.0L - s) / (s - 1.0L) - 0.5L * std::pow(N, -s) + s * std::pow(N, -s - 1.0L) / 12.0L;
  return sum;
}

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
inline double Phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Inverse of Phi by bisection.
inline double Phi_inv(double p) {
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (Phi(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// P(X <= x, Y <= y) for a standard bivariate normal, by integrating the
/// conditional law of X given Y over y.
inline double bvn(double x, double y, double rho) {
  const double s = std::sqrt(1.0 - rho * rho);
  return simpson([&](double t) { return phi(t) * Phi((x - rho * t) / s); }, -12.0, y, 40000);
}

/// Midpoint rule on an n x n grid of (0,1)^2.
inline double midpoint2d(const std::function<double(double, double)>& f, int n) {
  double s = 0.0;
  const double h = 1.0 / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += f((i + 0.5) * h, (j + 0.5) * h);
  return s * h * h;
}

/// Minimizer of sum w_i |r_i - K|.
inline double weighted_median(std::vector<std::pair<double, double>> rw) {
  std::sort(rw.begin(), rw.end());
  double total = 0.0;
  for (const auto& p : rw) total += p.second;
  double acc = 0.0;
  for (const auto& p : rw) {
    acc += p.second;
    if (acc >= 0.5 * total) return p.first;
  }
  return rw.back().first;
}

/// Frank copula density, symbolic form.
inline double frank_density(double t, double u, double v) {
  const double a = std::expm1(-t * u);
  const double b = std::expm1(-t * v);
  const double c = std::expm1(-t);
  const double e = std::exp(-t * (u + v));
  const double den = c + a * b;
  return -t * c * e / (den * den);
}

/// ARFIMA(0,d,0) correlation by direct product in long double.
inline long double arfima_rho(long double d, long n) {
  long double r = 1.0L;
  for (long k = 1; k <= n; ++k) r *= (k - 1 + d) / (k - d);
  return r;
}

}  // namespace oracle
