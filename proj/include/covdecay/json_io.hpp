#pragma once

#include <string>

#include <json.hpp>

#include "covdecay/copulas.hpp"
#include "covdecay/decay.hpp"
#include "covdecay/marginals.hpp"

namespace covdecay {

using Json = nlohmann::ordered_json;

/// Serialize with every floating-point number written as %.17g.
std::string dump_json(const Json& j, int indent = -1);

Json to_json(const Marginal& m);
Marginal marginal_from_json(const Json& j);

/// {"family": ..., "theta": [...]}
Json to_json(const CopulaSpec& c);
CopulaSpec copula_from_json(const Json& j);

/// {"kind": ..., parameters...}; a string is parsed as DecaySchedule::parse.
Json to_json(const DecaySchedule& s);
DecaySchedule schedule_from_json(const Json& j);

Json to_json(const DecayConstants& k);

}  // namespace covdecay
