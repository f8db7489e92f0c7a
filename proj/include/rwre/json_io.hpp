#pragma once

#include <json.hpp>

#include "rwre/environment.hpp"

namespace rwre {

// "variant" sub-object is discriminated by "type":
//   { "type": "point_mass", "base": [...] }
//   { "type": "elliptic_perturbation", "base": [...], "spread": s }
//   { "type": "two_kernel_mixture", "weight": w, "k1": [...], "k2": [...] }
EnvironmentModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const EnvironmentModel& model);

}  // namespace rwre
