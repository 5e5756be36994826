#pragma once

#include <string>

#include <json.hpp>

#include "infoshare/session.hpp"

// JSON (de)serialization for session configs and agent coefficient sets.
// Parsing throws std::invalid_argument naming the offending key.

namespace infoshare::config {

nlohmann::json coefficients_to_json(const agents::ReactionCoefficients& c);
agents::ReactionCoefficients coefficients_from_json(const nlohmann::json& j,
                                                    const std::string& context);

nlohmann::json session_config_to_json(const session::SessionConfig& config);
session::SessionConfig session_config_from_json(const nlohmann::json& j);
session::SessionConfig load_session_config(const std::string& path);

} // namespace infoshare::config
