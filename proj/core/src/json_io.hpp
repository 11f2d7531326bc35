#pragma once

// Private JSON conversions shared between core translation units.

#include "json.hpp"

#include "crisis/metrics.hpp"
#include "crisis/strategies.hpp"

namespace crisis {

nlohmann::json to_json_value(const MetricsReport& report);
MetricsReport metrics_from_json_value(const nlohmann::json& j);

nlohmann::json to_json_value(const StrategyConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
StrategyConfig strategy_config_from_json_value(const nlohmann::json& j);

nlohmann::json to_json_value(const RunRecord& record);
RunRecord run_record_from_json_value(const nlohmann::json& j);

}  // namespace crisis
