#include "covdecay/copulas.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "covdecay/errors.hpp"

namespace covdecay {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kOpenMargin = 1e-12;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::vector<FamilyTraits> build_traits() {
  const ParamBounds unit_sym{-1.0, 1.0, false, false};
  const ParamBounds unit{0.0, 1.0, false, false};
  const ParamBounds delta{1.0, kInf, false, true};
  return {
      {Family::fgm, {"theta"}, {unit_sym}, {0.0}, {Side::two_sided}, {false}},
      {Family::amh, {"theta"}, {unit_sym}, {0.0}, {Side::two_sided}, {false}},
      // theta = 0 is the limit point; evaluated as Pi.
      {Family::gumbel_barnett, {"theta"}, {unit}, {0.0}, {Side::right}, {false}},
      {Family::frank, {"theta"}, {{-kInf, kInf, true, true}}, {0.0}, {Side::two_sided}, {false}},
      {Family::gaussian, {"rho"}, {{-1.0, 1.0, true, true}}, {0.0}, {Side::two_sided}, {false}},
      {Family::tawn_mixed, {"theta"}, {unit}, {0.0}, {Side::right}, {false}},
      {Family::euclidean, {"delta"}, {delta}, {kNaN}, {Side::two_sided}, {false}},
      {Family::mix3,
       {"gamma", "alpha", "delta"},
       {unit_sym, unit, delta},
       {0.0, 1.0, 1.0},
       {Side::two_sided, Side::left, Side::right},
       {false, false, true}},
      {Family::pi, {}, {}, {}, {}, {}},
      {Family::w, {}, {}, {}, {}, {}},
      {Family::m, {}, {}, {}, {}, {}},
  };
}

void require_unit_closed(double u, double v) {
  if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0))
    throw DomainError("copula arguments must lie in [0,1]^2, got (" + fmt(u) + ", " + fmt(v) + ")");
}

void require_unit_open(double u, double v) {
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0))
    throw DomainError("copula density arguments must lie in (0,1)^2, got (" + fmt(u) + ", " +
                      fmt(v) + ")");
}

double fgm_core(double g, double u, double v) { return u * v * (1.0 + g * (1.0 - u) * (1.0 - v)); }

/// 1 - ((1-u)^d + (1-v)^d)^(1/d), possibly negative; scaled to stay exact
/// for large d.
double euclid_inner(double d, double u, double v) {
  const double a = 1.0 - u;
  const double b = 1.0 - v;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  if (hi == 0.0) return 1.0;
  return 1.0 - hi * std::pow(1.0 + std::pow(lo / hi, d), 1.0 / d);
}

double euclid_cdf(double d, double u, double v) { return std::max(euclid_inner(d, u, v), 0.0); }

double interior_cdf(const CopulaSpec& c, double u, double v) {
  const auto& th = c.theta();
  switch (c.family()) {
    case Family::fgm:
      return fgm_core(th[0], u, v);
    case Family::amh:
      return u * v / (1.0 - th[0] * (1.0 - u) * (1.0 - v));
    case Family::gumbel_barnett:
      return u * v * std::exp(-th[0] * std::log(u) * std::log(v));
    case Family::frank: {
      const double t = th[0];
      if (t == 0.0) return u * v;
      return -std::log1p(std::expm1(-t * u) * std::expm1(-t * v) / std::expm1(-t)) / t;
    }
    case Family::gaussian:
      if (th[0] == 0.0) return u * v;
      return bvn_cdf(norm_quantile(u), norm_quantile(v), th[0]);
    case Family::tawn_mixed: {
      const double lu = std::log(u);
      const double lv = std::log(v);
      return u * v * std::exp(-th[0] * lu * lv / (lu + lv));
    }
    case Family::euclidean:
      return euclid_cdf(th[0], u, v);
    case Family::mix3:
      return th[1] * fgm_core(th[0], u, v) + (1.0 - th[1]) * euclid_cdf(th[2], u, v);
    case Family::pi:
      return u * v;
    case Family::w:
      return std::max(u + v - 1.0, 0.0);
    case Family::m:
      return std::min(u, v);
  }
  throw DomainError("unknown copula family");
}

bool has_euclid_part(const CopulaSpec& c) {
  return c.family() == Family::euclidean || (c.family() == Family::mix3 && c.theta()[1] < 1.0);
}

double euclid_delta(const CopulaSpec& c) {
  return c.family() == Family::euclidean ? c.theta()[0] : c.theta()[2];
}

/// True when the max-clause of the Euclidean part switches among the
/// given (u, v, delta) stencil points.
bool euclid_switches(const std::vector<std::array<double, 3>>& points) {
  bool pos = false;
  bool nonpos = false;
  for (const auto& p : points) {
    if (euclid_inner(p[2], p[0], p[1]) > 0.0)
      pos = true;
    else
      nonpos = true;
  }
  return pos && nonpos;
}

double numeric_theta_derivative(const CopulaSpec& c, std::size_t i, double u, double v,
                                int order) {
  const Interval dom = parameter_interval(c.family(), i);
  const double x = c.theta()[i];
  const Side side = choose_side(x, kThetaStep, order, dom);
  auto g = [&](double t) { return copula_cdf(c.with(i, t), u, v); };
  return richardson_diff(g, x, kThetaStep, order, side, dom);
}

double numeric_mixed_theta(const CopulaSpec& c, std::size_t i, std::size_t j, double u, double v) {
  const Interval di = parameter_interval(c.family(), i);
  const Interval dj = parameter_interval(c.family(), j);
  const Side si = choose_side(c.theta()[i], kThetaStep, 1, di);
  const Side sj = choose_side(c.theta()[j], kThetaStep, 1, dj);
  auto g = [&](double a, double b) { return copula_cdf(c.with(i, a).with(j, b), u, v); };
  return mixed_partial(g, c.theta()[i], c.theta()[j], kThetaStep, si, sj, di, dj);
}

void guard_euclid_delta_stencil(const CopulaSpec& c, std::size_t delta_index, double u, double v) {
  const double d = c.theta()[delta_index];
  std::vector<std::array<double, 3>> pts;
  for (int k = -3; k <= 3; ++k) {
    const double dk = d + k * kThetaStep;
    if (dk >= 1.0) pts.push_back({u, v, dk});
  }
  if (euclid_switches(pts))
    throw UnsupportedError("Euclidean max-clause switches within the delta stencil at (" + fmt(u) +
                           ", " + fmt(v) + ")");
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::fgm: return "fgm";
    case Family::amh: return "amh";
    case Family::gumbel_barnett: return "gumbel-barnett";
    case Family::frank: return "frank";
    case Family::gaussian: return "gaussian";
    case Family::tawn_mixed: return "tawn";
    case Family::euclidean: return "euclidean";
    case Family::mix3: return "mix3";
    case Family::pi: return "pi";
    case Family::w: return "w";
    case Family::m: return "m";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) {
    return ch == '_' ? '-' : static_cast<char>(std::tolower(ch));
  });
  if (s == "fgm") return Family::fgm;
  if (s == "amh") return Family::amh;
  if (s == "gumbel-barnett" || s == "gb") return Family::gumbel_barnett;
  if (s == "frank") return Family::frank;
  if (s == "gaussian" || s == "normal") return Family::gaussian;
  if (s == "tawn" || s == "tawn-mixed") return Family::tawn_mixed;
  if (s == "euclidean") return Family::euclidean;
  if (s == "mix3") return Family::mix3;
  if (s == "pi" || s == "independence") return Family::pi;
  if (s == "w") return Family::w;
  if (s == "m") return Family::m;
  throw DomainError("unknown copula family '" + std::string(name) + "'");
}

const FamilyTraits& family_traits(Family f) {
  static const std::vector<FamilyTraits> table = build_traits();
  return table.at(static_cast<std::size_t>(f));
}

CopulaSpec::CopulaSpec(Family family, std::vector<double> theta)
    : family_(family), theta_(std::move(theta)) {
  const FamilyTraits& tr = family_traits(family_);
  if (theta_.size() != tr.bounds.size())
    throw DomainError(family_name(family_) + " expects " + std::to_string(tr.bounds.size()) +
                      " parameter(s), got " + std::to_string(theta_.size()));
  for (std::size_t i = 0; i < theta_.size(); ++i) {
    const double t = theta_[i];
    const ParamBounds& b = tr.bounds[i];
    const bool ok = std::isfinite(t) && (b.lo_open ? t > b.lo : t >= b.lo) &&
                    (b.hi_open ? t < b.hi : t <= b.hi);
    if (!ok)
      throw DomainError(family_name(family_) + ": parameter " + tr.param_names[i] + " = " +
                        fmt(t) + " outside its domain");
  }
}

CopulaSpec CopulaSpec::with(std::size_t i, double value) const {
  std::vector<double> t = theta_;
  t.at(i) = value;
  return CopulaSpec(family_, std::move(t));
}

Interval parameter_interval(Family f, std::size_t i) {
  const ParamBounds& b = family_traits(f).bounds.at(i);
  Interval out{b.lo, b.hi};
  if (b.lo_open && std::isfinite(b.lo)) out.lo = b.lo + kOpenMargin;
  if (b.hi_open && std::isfinite(b.hi)) out.hi = b.hi - kOpenMargin;
  return out;
}

double copula_cdf(const CopulaSpec& c, double u, double v) {
  require_unit_closed(u, v);
  if (u == 0.0 || v == 0.0) return 0.0;
  if (u == 1.0) return v;
  if (v == 1.0) return u;
  return interior_cdf(c, u, v);
}

double copula_density(const CopulaSpec& c, double u, double v) {
  require_unit_open(u, v);
  const auto& th = c.theta();
  switch (c.family()) {
    case Family::fgm:
      return 1.0 + th[0] * (1.0 - 2.0 * u) * (1.0 - 2.0 * v);
    case Family::pi:
      return 1.0;
    case Family::gaussian: {
      const double r = th[0];
      const double x = norm_quantile(u);
      const double y = norm_quantile(v);
      const double q = 1.0 - r * r;
      return std::exp((2.0 * r * x * y - r * r * (x * x + y * y)) / (2.0 * q)) / std::sqrt(q);
    }
    case Family::w:
    case Family::m:
      throw UnsupportedError(family_name(c.family()) + " copula has no density");
    default:
      break;
  }
  if (has_euclid_part(c) && euclid_delta(c) == 1.0)
    throw UnsupportedError("Euclidean component with delta = 1 is singular");

  const double h = std::min({kDensityStep, 0.5 * u, 0.5 * (1.0 - u), 0.5 * v, 0.5 * (1.0 - v)});
  if (has_euclid_part(c)) {
    const double d = euclid_delta(c);
    if (euclid_switches({{u - h, v - h, d}, {u - h, v + h, d}, {u + h, v - h, d}, {u + h, v + h, d}}))
      throw UnsupportedError("Euclidean max-clause switches within the density stencil at (" +
                             fmt(u) + ", " + fmt(v) + ")");
  }
  const double val = (interior_cdf(c, u + h, v + h) - interior_cdf(c, u + h, v - h) -
                      interior_cdf(c, u - h, v + h) + interior_cdf(c, u - h, v - h)) /
                     (4.0 * h * h);
  return std::max(val, 0.0);
}

double dtheta_cdf(const CopulaSpec& c, std::size_t i, double u, double v, int order, int j) {
  const std::size_t np = c.theta().size();
  if (i >= np) throw DomainError("dtheta_cdf: parameter index out of range");
  if (order != 1 && order != 2) throw DomainError("dtheta_cdf: order must be 1 or 2");
  const std::size_t jj = j < 0 ? i : static_cast<std::size_t>(j);
  if (jj >= np) throw DomainError("dtheta_cdf: parameter index out of range");
  if (order == 1 && jj != i) throw DomainError("dtheta_cdf: mixed index requires order 2");
  require_unit_closed(u, v);
  if (u == 0.0 || v == 0.0 || u == 1.0 || v == 1.0) return 0.0;

  const auto& th = c.theta();
  const double fgm_d = u * v * (1.0 - u) * (1.0 - v);
  switch (c.family()) {
    case Family::fgm:
      return order == 1 ? fgm_d : 0.0;
    case Family::mix3: {
      const std::size_t a = std::min(i, jj);
      const std::size_t b = std::max(i, jj);
      if (order == 1) {
        if (a == 0) return th[1] * fgm_d;
        if (a == 1) return fgm_core(th[0], u, v) - euclid_cdf(th[2], u, v);
      } else {
        if (a == 0 && b == 0) return 0.0;
        if (a == 1 && b == 1) return 0.0;
        if (a == 0 && b == 1) return fgm_d;
        if (a == 0 && b == 2) return 0.0;
      }
      // Derivatives in delta act on the Euclidean component only.
      guard_euclid_delta_stencil(c, 2, u, v);
      const CopulaSpec e(Family::euclidean, th[2]);
      const double de = numeric_theta_derivative(e, 0, u, v, order == 2 && a == 2 ? 2 : 1);
      if (order == 1) return (1.0 - th[1]) * de;
      if (a == 1) return -de;
      return (1.0 - th[1]) * de;
    }
    case Family::euclidean:
      guard_euclid_delta_stencil(c, 0, u, v);
      break;
    default:
      break;
  }
  if (jj != i) return numeric_mixed_theta(c, i, jj, u, v);
  return numeric_theta_derivative(c, i, u, v, order);
}

}  // namespace covdecay
