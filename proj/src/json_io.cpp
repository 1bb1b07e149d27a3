#include "covdecay/json_io.hpp"

#include <cmath>
#include <cstdio>

#include "covdecay/errors.hpp"

namespace covdecay {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void write_number(std::string& out, double x) {
  if (!std::isfinite(x)) {
    out += "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
  // Keep integral-valued floats recognisable as floats.
  if (std::string_view(buf).find_first_of(".eEn") == std::string_view::npos) out += ".0";
}

void write(std::string& out, const Json& j, int indent, int depth) {
  auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        write(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& el : j) {
        if (!first) out += indent < 0 ? "," : ", ";
        first = false;
        write(out, el, indent < 0 ? -1 : indent, depth + 1);
      }
      out += ']';
      return;
    }
    case Json::value_t::number_float:
      write_number(out, j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

std::vector<double> number_list(const Json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  return j.at(key).get<std::vector<double>>();
}

double number(const Json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  return j.at(key).get<double>();
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  write(out, j, indent, 0);
  return out;
}

Json to_json(const Marginal& m) {
  Json j;
  j["family"] = m.family_name();
  j["params"] = m.parameter_list();
  return j;
}

Marginal marginal_from_json(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    throw ConfigError("marginal must be an object with family and params, got '" + s + "'");
  }
  if (!j.contains("family")) throw ConfigError("marginal: missing key 'family'");
  return Marginal::from_name(j.at("family").get<std::string>(), number_list(j, "params"));
}

Json to_json(const CopulaSpec& c) {
  Json j;
  j["family"] = family_name(c.family());
  j["theta"] = c.theta();
  return j;
}

CopulaSpec copula_from_json(const Json& j) {
  if (!j.contains("family")) throw ConfigError("copula: missing key 'family'");
  const Family f = parse_family(j.at("family").get<std::string>());
  std::vector<double> theta;
  if (j.contains("theta")) {
    const Json& t = j.at("theta");
    theta = t.is_array() ? t.get<std::vector<double>>() : std::vector<double>{t.get<double>()};
  }
  return CopulaSpec(f, theta);
}

Json to_json(const DecaySchedule& s) {
  Json j;
  j["kind"] = s.kind_name();
  std::visit(overloaded{
                 [&](const FgmPower& p) {
                   j["alpha"] = p.alpha;
                   j["kappa0"] = p.kappa0;
                 },
                 [&](const MaQ& p) { j["coeffs"] = p.coeffs; },
                 [&](const Ar1& p) { j["phi"] = p.phi; },
                 [&](const Arma21Example&) {},
                 [&](const ArfimaD& p) { j["d"] = p.d; },
                 [&](const LinearProcess& p) { j["coeffs"] = p.coeffs; },
                 [&](const Explicit& p) { j["table"] = p.table; },
             },
             s.kind());
  return j;
}

DecaySchedule schedule_from_json(const Json& j) {
  if (j.is_string()) return DecaySchedule::parse(j.get<std::string>());
  if (!j.contains("kind")) throw ConfigError("schedule: missing key 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "fgm") return DecaySchedule(FgmPower{number(j, "alpha"), number(j, "kappa0")});
  if (kind == "ma") return DecaySchedule(MaQ{number_list(j, "coeffs")});
  if (kind == "ar1") return DecaySchedule(Ar1{number(j, "phi")});
  if (kind == "arma21") return DecaySchedule(Arma21Example{});
  if (kind == "arfima") return DecaySchedule(ArfimaD{number(j, "d")});
  if (kind == "linear") return DecaySchedule(LinearProcess{number_list(j, "coeffs")});
  if (kind == "explicit") return DecaySchedule(Explicit{number_list(j, "table")});
  throw ConfigError("schedule: unknown kind '" + kind + "'");
}

Json to_json(const DecayConstants& k) {
  Json j;
  j["family"] = family_name(k.family);
  j["anchor"] = k.anchor;
  j["fixed"] = k.fixed;
  j["k1"] = k.k1;
  j["k2"] = k.k2;
  j["grid_order"] = k.grid_order;
  j["degenerate"] = k.degenerate;
  return j;
}

}  // namespace covdecay
