#pragma once

#include <json.hpp>

#include "dime/heal.hpp"
#include "dime/network.hpp"
#include "dime/tasp.hpp"

namespace dime {

nlohmann::ordered_json network_json(const UncertainNetwork& net);
UncertainNetwork network_from_json(const nlohmann::json& doc);

/// Keys: delta, nsim, ucb_c, aggregation ("mean" | "weighted"), time_budget_ms.
/// Missing keys keep the value from `defaults`. Throws ValidationError.
TaspConfig tasp_config_from_json(const nlohmann::json& doc, const TaspConfig& defaults = {});
nlohmann::ordered_json tasp_config_json(const TaspConfig& config);

nlohmann::ordered_json recommendation_json(const Recommendation& rec);

/// Full session state: parameters, partition, base and current network,
/// history and the cached recommendation. session_from_json(session_json(s))
/// rebuilds a session whose snapshot is identical.
nlohmann::ordered_json session_json(const PlanSession& session);
PlanSession session_from_json(const nlohmann::json& doc);

}  // namespace dime
