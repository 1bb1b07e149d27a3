#include "covdecay/decay.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "covdecay/errors.hpp"

namespace covdecay {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::vector<double> reciprocal_weights(const Marginal& m, const std::vector<double>& nodes) {
  std::vector<double> w(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) w[i] = 1.0 / m.hoeffding_weight(nodes[i]);
  return w;
}

/// Hoeffding covariance with the marginal weights folded into the grid.
class CovFunctional {
 public:
  CovFunctional(const Marginal& f0, const Marginal& fn, const QuadratureGrid& grid)
      : grid_(grid) {
    QuadratureGrid& g = grid_;
    const auto r0 = reciprocal_weights(f0, g.nodes_u);
    const auto rn = reciprocal_weights(fn, g.nodes_v);
    for (std::size_t i = 0; i < r0.size(); ++i) g.weights_u[i] *= r0[i];
    for (std::size_t j = 0; j < rn.size(); ++j) g.weights_v[j] *= rn[j];
  }

  double operator()(const CopulaSpec& c) const {
    return integrate2d([&](double u, double v) { return copula_cdf(c, u, v) - u * v; }, grid_);
  }

 private:
  QuadratureGrid grid_;
};

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    std::string item(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                                      : comma - pos));
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) item.erase(0, 1);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) item.pop_back();
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size())
      throw DomainError("schedule: cannot parse number '" + item + "'");
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += fmt(xs[i]);
  }
  return s;
}

double autocorr_coeffs(const std::vector<double>& c, long long n) {
  double num = 0.0;
  double den = 0.0;
  for (double x : c) den += x * x;
  for (std::size_t j = 0; j + static_cast<std::size_t>(n) < c.size(); ++j)
    num += c[j] * c[j + static_cast<std::size_t>(n)];
  return num / den;
}

void validate_coeffs(const std::vector<double>& c, const char* what) {
  if (c.empty()) throw DomainError(std::string(what) + ": coefficient list is empty");
  double s = 0.0;
  for (double x : c) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite coefficient");
    s += x * x;
  }
  if (!(s > 0.0)) throw DomainError(std::string(what) + ": coefficients are all zero");
}

constexpr long long kArfimaLogThreshold = 64;

double arfima_rho(double d, long long n) {
  if (d == 0.0) return 0.0;
  if (n <= kArfimaLogThreshold) {
    double p = 1.0;
    for (long long k = 1; k <= n; ++k) p *= (k - 1 + d) / (k - d);
    return p;
  }
  // Only the k = 1 factor can be negative (d < 0).
  double log_abs = 0.0;
  for (long long k = 1; k <= n; ++k) log_abs += std::log(std::abs(k - 1 + d)) - std::log(k - d);
  return d < 0.0 ? -std::exp(log_abs) : std::exp(log_abs);
}

}  // namespace

double hoeffding_cov(const CopulaSpec& c, const Marginal& f0, const Marginal& fn,
                     const QuadratureGrid& grid) {
  return CovFunctional(f0, fn, grid)(c);
}

double DecayConstants::k1_scalar() const {
  for (std::size_t i = 0; i < k1.size(); ++i)
    if (!fixed[i]) return k1[i];
  throw DomainError("DecayConstants: no free coordinate");
}

double DecayConstants::k2_scalar() const {
  for (std::size_t i = 0; i < k1.size(); ++i)
    if (!fixed[i]) return k2[i][i];
  throw DomainError("DecayConstants: no free coordinate");
}

DecayConstants k_constants(Family family, const Marginal& f0, const Marginal& fn,
                           const QuadratureGrid& grid, const KOptions& options) {
  const FamilyTraits& tr = family_traits(family);
  const std::size_t np = tr.bounds.size();
  if (np == 0) throw DomainError("k_constants: " + family_name(family) + " has no parameters");

  DecayConstants out;
  out.family = family;
  out.anchor = options.anchor.empty() ? tr.anchor : options.anchor;
  out.fixed = options.fixed.empty() ? tr.fixed : options.fixed;
  const std::vector<Side> lateral = options.lateral.empty() ? tr.lateral : options.lateral;
  if (out.anchor.size() != np || out.fixed.size() != np || lateral.size() != np)
    throw DomainError("k_constants: anchor, mask and lateral sizes must match the family");
  for (double a : out.anchor)
    if (!std::isfinite(a))
      throw DomainError("k_constants: " + family_name(family) + " has no independence anchor");
  out.grid_order = grid.order;
  out.k1.assign(np, 0.0);
  out.k2.assign(np, std::vector<double>(np, 0.0));

  const CovFunctional cov(f0, fn, grid);
  std::map<std::vector<double>, double> cache;
  auto h = [&](const std::vector<double>& theta) {
    auto it = cache.find(theta);
    if (it != cache.end()) return it->second;
    const double value = cov(CopulaSpec(family, theta));
    cache.emplace(theta, value);
    return value;
  };
  auto along = [&](std::size_t i) {
    return [&, i](double t) {
      std::vector<double> th = out.anchor;
      th[i] = t;
      return h(th);
    };
  };
  auto check = [&](double x, const char* what) {
    if (!std::isfinite(x)) throw DomainError(std::string("k_constants: non-finite ") + what);
    return x;
  };

  const double step = options.step;
  const double step2 = options.step2;
  if (!(step > 0.0) || !(step2 > 0.0)) throw DomainError("k_constants: steps must be positive");
  for (std::size_t i = 0; i < np; ++i) {
    if (out.fixed[i]) continue;
    const Interval dom = parameter_interval(family, i);
    out.k1[i] = check(richardson_diff(along(i), out.anchor[i], step, 1, lateral[i], dom), "K1");
    out.k2[i][i] = check(richardson_diff(along(i), out.anchor[i], step2, 2, lateral[i], dom), "K2");
  }
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t j = i + 1; j < np; ++j) {
      if (out.fixed[i] || out.fixed[j]) continue;
      auto f2 = [&](double a, double b) {
        std::vector<double> th = out.anchor;
        th[i] = a;
        th[j] = b;
        return h(th);
      };
      const double v =
          check(mixed_partial(f2, out.anchor[i], out.anchor[j], step2, lateral[i], lateral[j],
                              parameter_interval(family, i), parameter_interval(family, j)),
                "mixed K2");
      out.k2[i][j] = v;
      out.k2[j][i] = v;
    }
  }
  out.degenerate = true;
  for (std::size_t i = 0; i < np; ++i)
    if (!out.fixed[i] && std::abs(out.k1[i]) >= 1e-12) out.degenerate = false;
  return out;
}

DecaySchedule::DecaySchedule(Kind kind) : kind_(std::move(kind)) {
  std::visit(overloaded{
                 [](const FgmPower& s) {
                   if (!(s.alpha > 1.0)) throw DomainError("FgmPower: alpha must exceed 1");
                   const double z = riemann_zeta(s.alpha);
                   if (!(s.kappa0 >= z * (1.0 - 1e-12)))
                     throw DomainError("FgmPower: kappa0 = " + fmt(s.kappa0) +
                                       " is below zeta(alpha) = " + fmt(z));
                 },
                 [](const MaQ& s) { validate_coeffs(s.coeffs, "MaQ"); },
                 [](const Ar1& s) {
                   if (!(std::abs(s.phi) < 1.0)) throw DomainError("Ar1: |phi| must be < 1");
                 },
                 [](const Arma21Example&) {},
                 [](const ArfimaD& s) {
                   if (!(s.d > -0.5 && s.d < 0.5))
                     throw DomainError("ArfimaD: d must lie in (-0.5, 0.5)");
                 },
                 [](const LinearProcess& s) { validate_coeffs(s.coeffs, "LinearProcess"); },
                 [](const Explicit& s) {
                   if (s.table.empty()) throw DomainError("Explicit: empty table");
                   for (double r : s.table)
                     if (!(r > -1.0 && r < 1.0))
                       throw DomainError("Explicit: entries must lie in (-1, 1)");
                 },
             },
             kind_);
}

DecaySchedule DecaySchedule::parse(std::string_view text) {
  const std::size_t colon = text.find(':');
  std::string name(text.substr(0, colon));
  for (auto& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  const std::vector<double> args =
      colon == std::string_view::npos ? std::vector<double>{} : parse_list(text.substr(colon + 1));
  auto need = [&](std::size_t k) {
    if (args.size() != k)
      throw DomainError("schedule '" + name + "' expects " + std::to_string(k) + " argument(s)");
  };
  if (name == "fgm" || name == "fgm-power") {
    need(2);
    return DecaySchedule(FgmPower{args[0], args[1]});
  }
  if (name == "ma" || name == "maq") return DecaySchedule(MaQ{args});
  if (name == "ar1") {
    need(1);
    return DecaySchedule(Ar1{args[0]});
  }
  if (name == "arma21") {
    need(0);
    return DecaySchedule(Arma21Example{});
  }
  if (name == "arfima") {
    need(1);
    return DecaySchedule(ArfimaD{args[0]});
  }
  if (name == "linear") return DecaySchedule(LinearProcess{args});
  if (name == "explicit") return DecaySchedule(Explicit{args});
  throw DomainError("unknown schedule '" + std::string(text) + "'");
}

std::string DecaySchedule::kind_name() const {
  return std::visit(overloaded{
                        [](const FgmPower&) { return std::string("fgm"); },
                        [](const MaQ&) { return std::string("ma"); },
                        [](const Ar1&) { return std::string("ar1"); },
                        [](const Arma21Example&) { return std::string("arma21"); },
                        [](const ArfimaD&) { return std::string("arfima"); },
                        [](const LinearProcess&) { return std::string("linear"); },
                        [](const Explicit&) { return std::string("explicit"); },
                    },
                    kind_);
}

std::string DecaySchedule::to_string() const {
  return std::visit(overloaded{
                        [](const FgmPower& s) { return "fgm:" + fmt(s.alpha) + "," + fmt(s.kappa0); },
                        [](const MaQ& s) { return "ma:" + join(s.coeffs); },
                        [](const Ar1& s) { return "ar1:" + fmt(s.phi); },
                        [](const Arma21Example&) { return std::string("arma21"); },
                        [](const ArfimaD& s) { return "arfima:" + fmt(s.d); },
                        [](const LinearProcess& s) { return "linear:" + join(s.coeffs); },
                        [](const Explicit& s) { return "explicit:" + join(s.table); },
                    },
                    kind_);
}

double schedule_value(const DecaySchedule& s, long long n) {
  if (n < 1) throw DomainError("schedule_value: lag must be >= 1, got " + std::to_string(n));
  return std::visit(
      overloaded{
          [n](const FgmPower& p) { return std::pow(static_cast<double>(n), -p.alpha) / p.kappa0; },
          [n](const MaQ& p) { return autocorr_coeffs(p.coeffs, n); },
          [n](const Ar1& p) { return std::pow(p.phi, static_cast<double>(n)); },
          [n](const Arma21Example&) {
            return std::exp2(-static_cast<double>(n)) * (1.0 + 0.75 * static_cast<double>(n));
          },
          [n](const ArfimaD& p) { return arfima_rho(p.d, n); },
          [n](const LinearProcess& p) { return autocorr_coeffs(p.coeffs, n); },
          [n](const Explicit& p) {
            if (static_cast<std::size_t>(n) > p.table.size())
              throw DomainError("schedule_value: lag " + std::to_string(n) +
                                " beyond the explicit table");
            return p.table[static_cast<std::size_t>(n) - 1];
          },
      },
      s.kind());
}

std::vector<double> schedule_values(const DecaySchedule& s, std::size_t count) {
  std::vector<double> out(count);
  if (const auto* a = std::get_if<ArfimaD>(&s.kind())) {
    // Running product in log space; the sign is fixed by the first factor.
    const double d = a->d;
    double log_abs = 0.0;
    for (std::size_t k = 1; k <= count; ++k) {
      if (d == 0.0) {
        out[k - 1] = 0.0;
        continue;
      }
      const double kk = static_cast<double>(k);
      log_abs += std::log(std::abs(kk - 1.0 + d)) - std::log(kk - d);
      out[k - 1] = k <= static_cast<std::size_t>(kArfimaLogThreshold)
                       ? arfima_rho(d, static_cast<long long>(k))
                       : (d < 0.0 ? -std::exp(log_abs) : std::exp(log_abs));
    }
    return out;
  }
  for (std::size_t k = 1; k <= count; ++k) {
    if (const auto* e = std::get_if<Explicit>(&s.kind()); e && k > e->table.size())
      throw DomainError("schedule_values: explicit table shorter than requested");
    out[k - 1] = schedule_value(s, static_cast<long long>(k));
  }
  return out;
}

PredictedCov predicted_cov(const DecayConstants& consts, const DecaySchedule& s, long long n) {
  const double dt = schedule_value(s, n) - s.anchor();
  const double k1 = consts.k1_scalar();
  if (!std::isfinite(k1)) throw DomainError("predicted_cov: K1 is not finite");
  return {k1 * dt, 0.5 * std::abs(consts.k2_scalar()) * dt * dt};
}

}  // namespace covdecay
