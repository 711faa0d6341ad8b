// SPDX-License-Identifier: Apache-2.0

#include "ztc/scenario.hpp"

#include "ztc/error.hpp"
#include "ztc/json_util.hpp"

namespace ztc {

namespace {

nlohmann::json run_step(DeploymentEngine& engine, const nlohmann::json& step) {
  if (step.contains("order")) {
    const DeploymentRecord r = engine.run_pipeline(order_from_json(step.at("order")));
    nlohmann::json out = {{"action", "order"},
                          {"deploymentId", r.deploymentId},
                          {"lifecycle", to_string(r.lifecycle)}};
    if (r.chain) out["chain"] = chain_to_json(*r.chain);
    if (r.abortCause) out["reason"] = *r.abortCause;
    return out;
  }
  if (step.contains("teardown")) {
    const std::string id = step.at("teardown").get<std::string>();
    nlohmann::json out = {{"action", "teardown"}, {"summary", teardown_to_json(engine.teardown(id))}};
    out["lifecycle"] = to_string(engine.deployment(id)->lifecycle);
    return out;
  }
  if (step.contains("delete")) {
    const std::string id = step.at("delete").get<std::string>();
    const DeploymentRecord r = engine.delete_deployment(id);
    return {{"action", "delete"}, {"deploymentId", id}, {"lifecycle", to_string(r.lifecycle)}};
  }
  throw Error(ErrorCode::kParse, "step needs one of order, teardown, delete");
}

}  // namespace

nlohmann::json run_scenario(DeploymentEngine& engine, const nlohmann::json& script) {
  json_util::require_object(script, "scenario");
  json_util::reject_unknown(script, {"steps"}, "scenario");
  const auto& steps = script.at("steps");
  if (!steps.is_array()) throw Error(ErrorCode::kParse, "scenario.steps must be an array");
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    nlohmann::json summary;
    try {
      json_util::require_object(steps[i], "scenario step");
      summary = run_step(engine, steps[i]);
    } catch (const Error& e) {
      summary = {{"action", "error"}, {"error", to_string(e.code())}, {"message", e.what()}};
    } catch (const nlohmann::json::exception& e) {
      summary = {{"action", "error"}, {"error", "parse"}, {"message", e.what()}};
    }
    summary["step"] = i;
    out.push_back(std::move(summary));
  }
  return out;
}

}  // namespace ztc
