#include "covdecay/marginals.hpp"

#include <cmath>
#include <sstream>

#include "covdecay/errors.hpp"
#include "covdecay/numerics.hpp"

namespace covdecay {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_unit_open(double u, const char* op) {
  if (!(u > 0.0 && u < 1.0)) {
    std::ostringstream os;
    os.precision(17);
    os << op << ": argument must lie in (0,1), got " << u;
    throw DomainError(os.str());
  }
}

}  // namespace

Marginal::Marginal(Params params) : params_(params) {
  std::visit(overloaded{
                 [](const NormalParams& p) {
                   if (!(p.sigma > 0.0) || !std::isfinite(p.mu) || !std::isfinite(p.sigma))
                     throw DomainError("Normal marginal requires finite mu and sigma > 0");
                 },
                 [](const ExponentialScaleParams& p) {
                   if (!(p.lambda > 0.0) || !std::isfinite(p.lambda))
                     throw DomainError("Exponential marginal requires lambda > 0");
                 },
                 [](const EviParams& p) {
                   if (!(p.b > 0.0) || !std::isfinite(p.a) || !std::isfinite(p.b))
                     throw DomainError("EVI marginal requires finite a and b > 0");
                 },
                 [](const TriangularParams& p) {
                   if (!(p.b > p.a) || !std::isfinite(p.a) || !std::isfinite(p.b))
                     throw DomainError("Triangular marginal requires a < b");
                 },
             },
             params_);
}

Marginal Marginal::exponential_rate(double rate) {
  if (!(rate > 0.0)) throw DomainError("Exponential rate must be positive");
  return exponential_scale(1.0 / rate);
}

Marginal Marginal::from_name(std::string_view family, const std::vector<double>& params) {
  auto need = [&](std::size_t k) {
    if (params.size() != k)
      throw DomainError("marginal '" + std::string(family) + "' expects " + std::to_string(k) +
                        " parameter(s), got " + std::to_string(params.size()));
  };
  if (family == "normal" || family == "gaussian") {
    need(2);
    return normal(params[0], params[1]);
  }
  if (family == "exp" || family == "exponential" || family == "exp-scale") {
    need(1);
    return exponential_scale(params[0]);
  }
  if (family == "exp-rate") {
    need(1);
    return exponential_rate(params[0]);
  }
  if (family == "evi" || family == "gumbel") {
    need(2);
    return evi(params[0], params[1]);
  }
  if (family == "triangular" || family == "tri") {
    need(2);
    return triangular(params[0], params[1]);
  }
  throw DomainError("unknown marginal family '" + std::string(family) + "'");
}

std::string Marginal::family_name() const {
  return std::visit(overloaded{
                        [](const NormalParams&) { return std::string("normal"); },
                        [](const ExponentialScaleParams&) { return std::string("exp"); },
                        [](const EviParams&) { return std::string("evi"); },
                        [](const TriangularParams&) { return std::string("triangular"); },
                    },
                    params_);
}

std::vector<double> Marginal::parameter_list() const {
  return std::visit(overloaded{
                        [](const NormalParams& p) { return std::vector<double>{p.mu, p.sigma}; },
                        [](const ExponentialScaleParams& p) { return std::vector<double>{p.lambda}; },
                        [](const EviParams& p) { return std::vector<double>{p.a, p.b}; },
                        [](const TriangularParams& p) { return std::vector<double>{p.a, p.b}; },
                    },
                    params_);
}

double Marginal::cdf(double x) const {
  return std::visit(
      overloaded{
          [x](const NormalParams& p) { return norm_cdf((x - p.mu) / p.sigma); },
          [x](const ExponentialScaleParams& p) {
            return x <= 0.0 ? 0.0 : -std::expm1(-x / p.lambda);
          },
          [x](const EviParams& p) { return std::exp(-std::exp(-(x - p.a) / p.b)); },
          [x](const TriangularParams& p) {
            if (x <= p.a) return 0.0;
            if (x >= p.b) return 1.0;
            const double t = (x - p.a) / (p.b - p.a);
            return t * t;
          },
      },
      params_);
}

double Marginal::survival(double x) const {
  return std::visit(
      overloaded{
          [x](const NormalParams& p) { return norm_cdf(-(x - p.mu) / p.sigma); },
          [x](const ExponentialScaleParams& p) { return x <= 0.0 ? 1.0 : std::exp(-x / p.lambda); },
          [x](const EviParams& p) { return -std::expm1(-std::exp(-(x - p.a) / p.b)); },
          [x](const TriangularParams& p) {
            if (x <= p.a) return 1.0;
            if (x >= p.b) return 0.0;
            const double t = (x - p.a) / (p.b - p.a);
            return (1.0 - t) * (1.0 + t);
          },
      },
      params_);
}

double Marginal::normal_score(double x) const {
  const double u = cdf(x);
  if (u <= 0.5) return norm_quantile(u);
  return -norm_quantile(survival(x));
}

double Marginal::density(double x) const {
  return std::visit(
      overloaded{
          [x](const NormalParams& p) { return norm_pdf((x - p.mu) / p.sigma) / p.sigma; },
          [x](const ExponentialScaleParams& p) {
            return x < 0.0 ? 0.0 : std::exp(-x / p.lambda) / p.lambda;
          },
          [x](const EviParams& p) {
            const double z = (x - p.a) / p.b;
            return std::exp(-z - std::exp(-z)) / p.b;
          },
          [x](const TriangularParams& p) {
            if (x < p.a || x > p.b) return 0.0;
            const double w = p.b - p.a;
            return 2.0 * (x - p.a) / (w * w);
          },
      },
      params_);
}

double Marginal::quantile(double u) const {
  require_unit_open(u, "quantile");
  return std::visit(
      overloaded{
          [u](const NormalParams& p) { return p.mu + p.sigma * norm_quantile(u); },
          [u](const ExponentialScaleParams& p) { return -p.lambda * std::log1p(-u); },
          [u](const EviParams& p) { return p.a - p.b * std::log(-std::log(u)); },
          [u](const TriangularParams& p) { return p.a + (p.b - p.a) * std::sqrt(u); },
      },
      params_);
}

double Marginal::hoeffding_weight(double u) const {
  require_unit_open(u, "hoeffding_weight");
  return std::visit(
      overloaded{
          [u](const NormalParams& p) { return norm_pdf(norm_quantile(u)) / p.sigma; },
          [u](const ExponentialScaleParams& p) { return (1.0 - u) / p.lambda; },
          [u](const EviParams& p) { return -u * std::log(u) / p.b; },
          [u](const TriangularParams& p) { return 2.0 * std::sqrt(u) / (p.b - p.a); },
      },
      params_);
}

bool Marginal::operator==(const Marginal& other) const {
  return params_.index() == other.params_.index() &&
         parameter_list() == other.parameter_list();
}

}  // namespace covdecay
