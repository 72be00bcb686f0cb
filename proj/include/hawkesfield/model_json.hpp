#pragma once

// JSON schema for ModelParams:
//   { "firing_rate": {"variant": "sigmoid", "f_max": .., "gain": .., "threshold": ..},
//     "weight":      {"variant": "gaussian", "amplitude": .., "width": ..},
//     "initial":     {"variant": "gaussian_bump", "height": .., "center": [..], "width": ..},
//     "alpha": 1.0,
//     "rho":         {"variant": "uniform_box", "d": 1, "r": 1.0, "beta": 1.0} }
// Errors carry the JSON path of the offending field.

#include <string>

#include "json.hpp"

#include "hawkesfield/model.hpp"

namespace hawkesfield {

FiringRateFn firing_rate_from_json(const nlohmann::json& j, const std::string& path);
SynapticWeightFn weight_from_json(const nlohmann::json& j, std::size_t dim,
                                  const std::string& path);
InitialCondition initial_from_json(const nlohmann::json& j, std::size_t dim,
                                   const std::string& path);
SpatialMeasure measure_from_json(const nlohmann::json& j, const std::string& path);

ModelParams model_from_json(const nlohmann::json& j, const std::string& path = "");

nlohmann::json to_json(const ModelParams& params);

}  // namespace hawkesfield
