#pragma once

// JSON (de)serialization shared by the config loader, table persistence, and
// the CLI output writers.

#include "seqoff/channel.hpp"
#include "seqoff/types.hpp"

#include <json.hpp>

namespace seqoff {

nlohmann::json dist_to_json(const GainDistribution& dist);
GainDistribution dist_from_json(const nlohmann::json& j);

nlohmann::json task_to_json(const TaskProfile& profile);
TaskProfile task_from_json(const nlohmann::json& j);

nlohmann::json system_to_json(const SystemParams& params);
SystemParams system_from_json(const nlohmann::json& j);

}  // namespace seqoff
