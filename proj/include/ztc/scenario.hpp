// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include "ztc/deployment_engine.hpp"

namespace ztc {

// Replays a script of the form
//   {"steps": [{"order": {...}}, {"teardown": "d-001"}, {"delete": "d-001"}]}
// synchronously against `engine`. Returns one summary object per step; a
// failing step is reported in its summary and does not stop the replay.
nlohmann::json run_scenario(DeploymentEngine& engine, const nlohmann::json& script);

}  // namespace ztc
