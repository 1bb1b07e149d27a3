#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "covdecay/errors.hpp"

namespace covdecay {

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Gamma function for x > 0.
double gamma_fn(double x);

/// 1 / Gamma(x), extended by continuity to the poles (value 0 at x = 0).
double reciprocal_gamma(double x);

/// Riemann zeta for alpha > 1: direct sum plus Euler-Maclaurin tail.
double riemann_zeta(double alpha);

enum class NormalKind { pdf, cdf, quantile };

double norm_pdf(double x);
double norm_cdf(double x);
/// Acklam's rational approximation refined with one Halley step.
double norm_quantile(double p);
double std_normal(NormalKind kind, double x);

/// Standard bivariate normal CDF P(X <= x, Y <= y) with correlation rho,
/// |rho| < 1 (Genz's BVND algorithm).
double bvn_cdf(double x, double y, double rho);

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Gauss-Legendre nodes and weights for [-1, 1], ascending nodes.
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

/// Tensor-product Gauss-Legendre rule mapped to (0,1)^2.
struct QuadratureGrid {
  std::vector<double> nodes_u;
  std::vector<double> weights_u;
  std::vector<double> nodes_v;
  std::vector<double> weights_v;
  int order = 0;

  static constexpr int kDefaultOrder = 128;

  static QuadratureGrid gauss_legendre(int order = kDefaultOrder);
  static QuadratureGrid gauss_legendre(int order_u, int order_v);
};

[[noreturn]] void throw_nonfinite_integrand(double u, double v, double value);

/// Sum of w_i w_j f(u_i, v_j) over the grid.
template <class F>
double integrate2d(F&& f, const QuadratureGrid& grid) {
  double total = 0.0;
  for (std::size_t i = 0; i < grid.nodes_u.size(); ++i) {
    const double u = grid.nodes_u[i];
    double row = 0.0;
    for (std::size_t j = 0; j < grid.nodes_v.size(); ++j) {
      const double v = grid.nodes_v[j];
      const double value = f(u, v);
      if (!std::isfinite(value)) throw_nonfinite_integrand(u, v, value);
      row += grid.weights_v[j] * value;
    }
    total += grid.weights_u[i] * row;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Scalar minimization
// ---------------------------------------------------------------------------

struct BracketSearch {
  double lo = 0.0;
  double hi = 1.0;
  double tol = 1e-10;
  int max_iter = 500;
  /// Number of points of the coarse scan that selects the refinement
  /// bracket. 0 skips the scan and refines on [lo, hi] directly.
  int scan_points = 512;

  void validate() const;
};

struct ScalarMinimum {
  double argmin = 0.0;
  double min_value = 0.0;
};

/// Coarse grid scan over [lo, hi] followed by Brent refinement
/// (golden-section with parabolic steps) on the bracket around the best
/// grid point. Throws ConvergenceError when max_iter is exhausted.
ScalarMinimum minimize_scalar(const std::function<double(double)>& objective,
                              const BracketSearch& bracket);

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

enum class Side { two_sided, left, right };

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Finite difference of order 1 or 2.
///   two_sided: 3-point central formulas.
///   right/left: one-sided 3-point (order 1) or 4-point (order 2) formulas
///   using x, x +- h, x +- 2h (, x +- 3h).
/// Throws DomainError if a stencil point leaves `domain`.
double central_diff(const std::function<double(double)>& f, double x, double h,
                    int order, Side side, Interval domain = {});

/// central_diff with one Richardson extrapolation step (h and h/2); every
/// formula above is O(h^2).
double richardson_diff(const std::function<double(double)>& f, double x, double h,
                       int order, Side side, Interval domain = {});

/// Side for a stencil of step h at x: two_sided when both neighbours fit in
/// `domain`, otherwise the one-sided direction that fits.
Side choose_side(double x, double h, int order, Interval domain);

/// Mixed partial d2f/dxdy from product 3-point stencils (per-axis side),
/// with one Richardson step.
double mixed_partial(const std::function<double(double, double)>& f, double x, double y,
                     double h, Side side_x, Side side_y, Interval domain_x = {},
                     Interval domain_y = {});

}  // namespace covdecay
