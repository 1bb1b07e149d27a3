#include "covdecay/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/tools/minima.hpp>

namespace covdecay {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

double gamma_fn(double x) {
  if (!(x > 0.0)) throw DomainError("gamma_fn: argument must be positive, got " + fmt(x));
  return std::tgamma(x);
}

double reciprocal_gamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) return 0.0;
  return 1.0 / std::tgamma(x);
}

double riemann_zeta(double alpha) {
  if (!(alpha > 1.0)) throw DomainError("riemann_zeta: alpha must exceed 1, got " + fmt(alpha));
  // Bernoulli numbers B_2 .. B_14.
  static constexpr std::array<double, 7> kB2j = {1.0 / 6.0,     -1.0 / 30.0, 1.0 / 42.0,
                                                 -1.0 / 30.0,   5.0 / 66.0,  -691.0 / 2730.0,
                                                 7.0 / 6.0};
  constexpr int kN = 16;
  double sum = 0.0;
  for (int k = kN - 1; k >= 1; --k) sum += std::pow(static_cast<double>(k), -alpha);

  const double n = kN;
  double tail = std::pow(n, 1.0 - alpha) / (alpha - 1.0) + 0.5 * std::pow(n, -alpha);
  // term_j = B_2j / (2j)! * alpha (alpha+1) ... (alpha+2j-2) * n^(-alpha-2j+1)
  double rising = alpha;                  // alpha (alpha+1) ... (alpha + 2j - 2)
  double factorial = 2.0;                 // (2j)!
  double power = std::pow(n, -alpha - 1.0);
  for (std::size_t j = 1; j <= kB2j.size(); ++j) {
    tail += kB2j[j - 1] / factorial * rising * power;
    const double jj = static_cast<double>(j);
    rising *= (alpha + 2.0 * jj - 1.0) * (alpha + 2.0 * jj);
    factorial *= (2.0 * jj + 1.0) * (2.0 * jj + 2.0);
    power /= n * n;
  }
  return sum + tail;
}

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

namespace {

// Lower-half quantile for p in (0, 0.5].
double norm_quantile_lower(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double kLow = 0.02425;

  double x;
  if (p < kLow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  // One Halley step.
  const double e = norm_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("norm_quantile: probability must lie in (0,1), got " + fmt(p));
  if (p <= 0.5) return norm_quantile_lower(p);
  return -norm_quantile_lower(1.0 - p);
}

double std_normal(NormalKind kind, double x) {
  switch (kind) {
    case NormalKind::pdf:
      return norm_pdf(x);
    case NormalKind::cdf:
      return norm_cdf(x);
    case NormalKind::quantile:
      return norm_quantile(x);
  }
  throw DomainError("std_normal: unknown kind");
}

// ---------------------------------------------------------------------------
// Bivariate normal
// ---------------------------------------------------------------------------

namespace {

struct HalfRule {
  std::vector<double> x;  // positive Gauss-Legendre nodes on [-1,1]
  std::vector<double> w;
};

HalfRule half_rule(int order) {
  std::vector<double> nodes, weights;
  gauss_legendre(order, nodes, weights);
  HalfRule r;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] > 0.0) {
      r.x.push_back(nodes[i]);
      r.w.push_back(weights[i]);
    }
  }
  return r;
}

const HalfRule& genz_rule(double abs_r) {
  static const HalfRule r6 = half_rule(6);
  static const HalfRule r12 = half_rule(12);
  static const HalfRule r20 = half_rule(20);
  if (abs_r < 0.3) return r6;
  if (abs_r < 0.75) return r12;
  return r20;
}

// P(X > dh, Y > dk).
double bvn_upper(double dh, double dk, double r) {
  constexpr double kTwoPi = 2.0 * kPi;
  if (std::isinf(dh) || std::isinf(dk)) {
    if (dh == INFINITY || dk == INFINITY) return 0.0;
    if (dh == -INFINITY) return dk == -INFINITY ? 1.0 : norm_cdf(-dk);
    return norm_cdf(-dh);
  }
  if (r == 0.0) return norm_cdf(-dh) * norm_cdf(-dk);

  const HalfRule& rule = genz_rule(std::abs(r));
  double h = dh;
  double k = dk;
  double hk = h * k;
  double bvn = 0.0;

  if (std::abs(r) < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = 0.5 * std::asin(r);
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      for (double sign : {-1.0, 1.0}) {
        const double sn = std::sin(asr * (1.0 + sign * rule.x[i]));
        bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    bvn = bvn * asr / kTwoPi + norm_cdf(-h) * norm_cdf(-k);
  } else {
    if (r < 0.0) {
      k = -k;
      hk = -hk;
    }
    if (std::abs(r) < 1.0) {
      const double as = (1.0 - r) * (1.0 + r);
      double a = std::sqrt(as);
      const double bs = (h - k) * (h - k);
      const double c = (4.0 - hk) / 8.0;
      const double d = (12.0 - hk) / 80.0;
      double asr = -0.5 * (bs / as + hk);
      if (asr > -100.0)
        bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
      if (hk > -100.0) {
        const double b = std::sqrt(bs);
        const double sp = std::sqrt(kTwoPi) * norm_cdf(-b / a);
        bvn -= std::exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
      }
      a *= 0.5;
      double sum = 0.0;
      for (std::size_t i = 0; i < rule.x.size(); ++i) {
        for (double sign : {-1.0, 1.0}) {
          const double t = a * (1.0 + sign * rule.x[i]);
          const double xs = t * t;
          asr = -0.5 * (bs / xs + hk);
          if (asr > -100.0) {
            const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
            const double rs = std::sqrt(1.0 - xs);
            const double ep = std::exp(-0.5 * hk * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
            sum += rule.w[i] * std::exp(asr) * (sp - ep);
          }
        }
      }
      bvn = (a * sum - bvn) / kTwoPi;
    }
    if (r > 0.0) {
      bvn += norm_cdf(-std::max(h, k));
    } else if (h >= k) {
      bvn = -bvn;
    } else {
      const double l = h < 0.0 ? norm_cdf(k) - norm_cdf(h) : norm_cdf(-h) - norm_cdf(-k);
      bvn = l - bvn;
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

}  // namespace

double bvn_cdf(double x, double y, double rho) {
  if (!(std::abs(rho) < 1.0))
    throw DomainError("bvn_cdf: |rho| must be < 1, got " + fmt(rho));
  if (std::isnan(x) || std::isnan(y)) throw DomainError("bvn_cdf: NaN argument");
  return bvn_upper(-x, -y, rho);
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  if (order < 1) throw DomainError("gauss_legendre: order must be >= 1");
  const int n = order;
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes[i] = -z;
    nodes[n - 1 - i] = z;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

QuadratureGrid QuadratureGrid::gauss_legendre(int order) { return gauss_legendre(order, order); }

QuadratureGrid QuadratureGrid::gauss_legendre(int order_u, int order_v) {
  auto mapped = [](int order, std::vector<double>& x, std::vector<double>& w) {
    covdecay::gauss_legendre(order, x, w);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = 0.5 * (x[i] + 1.0);
      w[i] *= 0.5;
    }
  };
  QuadratureGrid g;
  mapped(order_u, g.nodes_u, g.weights_u);
  mapped(order_v, g.nodes_v, g.weights_v);
  g.order = std::max(order_u, order_v);
  return g;
}

void throw_nonfinite_integrand(double u, double v, double value) {
  throw IntegrationError("integrand is not finite (" + fmt(value) + ") at node (u=" + fmt(u) +
                             ", v=" + fmt(v) + ")",
                         u, v);
}

// ---------------------------------------------------------------------------
// Minimization
// ---------------------------------------------------------------------------

void BracketSearch::validate() const {
  if (!(lo < hi)) throw DomainError("BracketSearch: lo must be < hi");
  if (!(tol > 0.0)) throw DomainError("BracketSearch: tol must be positive");
  if (max_iter < 1) throw DomainError("BracketSearch: max_iter must be positive");
  if (scan_points == 1) throw DomainError("BracketSearch: scan_points must be 0 or >= 2");
}

ScalarMinimum minimize_scalar(const std::function<double(double)>& objective,
                              const BracketSearch& bracket) {
  bracket.validate();
  double a = bracket.lo;
  double c = bracket.hi;
  ScalarMinimum best{a, std::numeric_limits<double>::infinity()};

  if (bracket.scan_points >= 2) {
    const int n = bracket.scan_points;
    const double step = (bracket.hi - bracket.lo) / (n - 1);
    int best_i = -1;
    for (int i = 0; i < n; ++i) {
      const double x = i == n - 1 ? bracket.hi : bracket.lo + step * i;
      const double f = objective(x);
      if (f < best.min_value) {
        best = {x, f};
        best_i = i;
      }
    }
    if (best_i < 0) throw DomainError("minimize_scalar: objective is not finite on the scan grid");
    a = best_i == 0 ? bracket.lo : bracket.lo + step * (best_i - 1);
    c = best_i == n - 1 ? bracket.hi : bracket.lo + step * (best_i + 1);
  }

  // Brent's bits argument: tolerance 2^(1-bits); capped by boost at half the
  // mantissa, i.e. about sqrt(machine epsilon).
  const int bits = std::clamp(static_cast<int>(std::ceil(-1.0 - std::log2(bracket.tol))), 2, 64);
  std::uintmax_t iters = static_cast<std::uintmax_t>(bracket.max_iter);
  const auto [x, fx] = boost::math::tools::brent_find_minima(
      [&](double t) {
        const double f = objective(t);
        return std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
      },
      a, c, bits, iters);
  if (fx < best.min_value || !std::isfinite(best.min_value)) best = {x, fx};
  if (iters >= static_cast<std::uintmax_t>(bracket.max_iter))
    throw ConvergenceError("minimize_scalar: iteration limit reached", best.argmin, best.min_value);
  return best;
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

double central_diff(const std::function<double(double)>& f, double x, double h, int order,
                    Side side, Interval domain) {
  if (!(h > 0.0)) throw DomainError("central_diff: step must be positive");
  if (order != 1 && order != 2) throw DomainError("central_diff: order must be 1 or 2");
  auto at = [&](double offset) {
    const double t = x + offset;
    if (!domain.contains(t))
      throw DomainError("central_diff: stencil point " + fmt(t) + " leaves the domain [" +
                        fmt(domain.lo) + ", " + fmt(domain.hi) + "]");
    return f(t);
  };
  switch (side) {
    case Side::two_sided:
      if (order == 1) return (at(h) - at(-h)) / (2.0 * h);
      return (at(h) - 2.0 * at(0.0) + at(-h)) / (h * h);
    case Side::right:
      if (order == 1) return (-3.0 * at(0.0) + 4.0 * at(h) - at(2.0 * h)) / (2.0 * h);
      return (2.0 * at(0.0) - 5.0 * at(h) + 4.0 * at(2.0 * h) - at(3.0 * h)) / (h * h);
    case Side::left:
      if (order == 1) return (3.0 * at(0.0) - 4.0 * at(-h) + at(-2.0 * h)) / (2.0 * h);
      return (2.0 * at(0.0) - 5.0 * at(-h) + 4.0 * at(-2.0 * h) - at(-3.0 * h)) / (h * h);
  }
  throw DomainError("central_diff: unknown side");
}

double richardson_diff(const std::function<double(double)>& f, double x, double h, int order,
                       Side side, Interval domain) {
  const double coarse = central_diff(f, x, h, order, side, domain);
  const double fine = central_diff(f, x, 0.5 * h, order, side, domain);
  return (4.0 * fine - coarse) / 3.0;
}

Side choose_side(double x, double h, int order, Interval domain) {
  if (domain.contains(x - h) && domain.contains(x + h)) return Side::two_sided;
  const double reach = order == 1 ? 2.0 * h : 3.0 * h;
  if (domain.contains(x + reach)) return Side::right;
  if (domain.contains(x - reach)) return Side::left;
  throw DomainError("choose_side: domain too narrow around " + fmt(x) + " for step " + fmt(h));
}

namespace {

struct Stencil {
  std::array<double, 3> offsets;
  std::array<double, 3> weights;
  int size;
};

Stencil first_order_stencil(Side side) {
  switch (side) {
    case Side::two_sided:
      return {{-1.0, 1.0, 0.0}, {-0.5, 0.5, 0.0}, 2};
    case Side::right:
      return {{0.0, 1.0, 2.0}, {-1.5, 2.0, -0.5}, 3};
    case Side::left:
      return {{0.0, -1.0, -2.0}, {1.5, -2.0, 0.5}, 3};
  }
  throw DomainError("unknown side");
}

double mixed_once(const std::function<double(double, double)>& f, double x, double y, double h,
                  Side side_x, Side side_y, Interval dx, Interval dy) {
  const Stencil sx = first_order_stencil(side_x);
  const Stencil sy = first_order_stencil(side_y);
  double total = 0.0;
  for (int i = 0; i < sx.size; ++i) {
    const double xi = x + sx.offsets[i] * h;
    if (!dx.contains(xi))
      throw DomainError("mixed_partial: stencil point " + fmt(xi) + " leaves the x domain");
    for (int j = 0; j < sy.size; ++j) {
      const double yj = y + sy.offsets[j] * h;
      if (!dy.contains(yj))
        throw DomainError("mixed_partial: stencil point " + fmt(yj) + " leaves the y domain");
      total += sx.weights[i] * sy.weights[j] * f(xi, yj);
    }
  }
  return total / (h * h);
}

}  // namespace

double mixed_partial(const std::function<double(double, double)>& f, double x, double y,
                     double h, Side side_x, Side side_y, Interval domain_x, Interval domain_y) {
  if (!(h > 0.0)) throw DomainError("mixed_partial: step must be positive");
  const double coarse = mixed_once(f, x, y, h, side_x, side_y, domain_x, domain_y);
  const double fine = mixed_once(f, x, y, 0.5 * h, side_x, side_y, domain_x, domain_y);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace covdecay
