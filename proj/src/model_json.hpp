#pragma once

#include <json.hpp>
#include <string>

#include "model.hpp"

namespace coordsim {

// Model block of a run config. Either
//   {"preset": {"name": ..., "params": {...}}}
// or
//   {"graph": {"kind": ..., "K": ..., "d": ..., "depth": ..., "n": ...,
//              "edges": [[a,b],...]},
//    "measures": {"coalescence": [{"from": v, "atoms": [{"y":..,"mass":..}]}],
//                 "death": [...],
//                 "reproduction": [{"from": v, "to": u, "atoms": [...]}],
//                 "migration": [...]}}
// Throws std::invalid_argument naming the offending key.
ModelSpec model_from_json(const nlohmann::json& j);

ModelSpec preset_from_json(const std::string& name, const nlohmann::json& params);

AtomicMeasure measure_from_json(const nlohmann::json& atoms, const std::string& where);

nlohmann::json type_signature_to_json(const TypeSignature& type);

}  // namespace coordsim
