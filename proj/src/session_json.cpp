#include "dime/session_json.hpp"

#include "dime/errors.hpp"

namespace dime {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json nodes_json(std::span<const NodeId> nodes) {
  auto out = ordered_json::array();
  for (NodeId v : nodes) out.push_back(v);
  return out;
}

ActionSet action_from_json(const json& doc) {
  if (!doc.is_array()) throw ValidationError("action must be an array of node ids");
  std::vector<NodeId> nodes;
  for (const auto& v : doc) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ValidationError("node ids must be non-negative integers");
    nodes.push_back(v.get<NodeId>());
  }
  return ActionSet(std::move(nodes));
}

ordered_json observations_json(const std::vector<EdgeObservation>& obs) {
  auto out = ordered_json::array();
  for (const EdgeObservation& o : obs) {
    ordered_json j;
    j["edge_index"] = o.uncertain_edge_index;
    j["exists"] = o.exists;
    out.push_back(j);
  }
  return out;
}

std::vector<EdgeObservation> observations_from_json(const json& doc) {
  std::vector<EdgeObservation> out;
  for (const auto& j : doc) {
    const auto idx = j.at("edge_index").get<long long>();
    if (idx < 0) throw ValidationError("edge_index must be non-negative");
    out.push_back({static_cast<std::size_t>(idx), j.at("exists").get<bool>()});
  }
  return out;
}

ordered_json pick_json(const PartitionPick& pick) {
  ordered_json j;
  j["partition"] = pick.partition;
  j["nodes"] = nodes_json(pick.nodes);
  j["expected_reward"] = pick.expected_reward;
  return j;
}

Recommendation recommendation_from_json(const json& doc) {
  Recommendation rec;
  rec.round = doc.at("round").get<std::size_t>();
  rec.action = action_from_json(doc.at("action"));
  rec.expected_reward = doc.at("expected_reward").get<double>();
  for (const auto& j : doc.at("provenance")) {
    PartitionPick pick;
    pick.partition = j.at("partition").get<std::size_t>();
    pick.nodes = j.at("nodes").get<std::vector<NodeId>>();
    pick.expected_reward = j.at("expected_reward").get<double>();
    rec.provenance.push_back(std::move(pick));
  }
  return rec;
}

}  // namespace

ordered_json network_json(const UncertainNetwork& net) {
  return ordered_json::parse(network_to_json(net, -1));
}

UncertainNetwork network_from_json(const json& doc) {
  return load_network(doc.dump()).network;
}

TaspConfig tasp_config_from_json(const json& doc, const TaspConfig& defaults) {
  TaspConfig c = defaults;
  if (doc.is_null()) return c;
  if (!doc.is_object()) throw ValidationError("config must be an object");
  try {
    auto count = [&](const char* key, std::size_t& field) {
      if (!doc.contains(key)) return;
      const auto& v = doc.at(key);
      if (!v.is_number_integer() || v.get<long long>() < 1) {
        throw ValidationError(std::string(key) + " must be a positive integer");
      }
      field = v.get<std::size_t>();
    };
    count("delta", c.delta_count);
    count("nsim", c.nsim);
    if (doc.contains("ucb_c")) c.exploration_c = doc.at("ucb_c").get<double>();
    if (doc.contains("aggregation")) c.aggregation = parse_aggregation(doc.at("aggregation").get<std::string>());
    if (doc.contains("time_budget_ms")) c.time_budget_ms = doc.at("time_budget_ms").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

ordered_json tasp_config_json(const TaspConfig& config) {
  ordered_json j;
  j["delta"] = config.delta_count;
  j["nsim"] = config.nsim;
  j["ucb_c"] = config.exploration_c;
  j["aggregation"] = to_string(config.aggregation);
  j["time_budget_ms"] = config.time_budget_ms;
  return j;
}

ordered_json recommendation_json(const Recommendation& rec) {
  ordered_json j;
  j["round"] = rec.round;
  j["action"] = nodes_json(rec.action.nodes());
  auto prov = ordered_json::array();
  for (const PartitionPick& p : rec.provenance) prov.push_back(pick_json(p));
  j["provenance"] = prov;
  j["expected_reward"] = rec.expected_reward;
  return j;
}

ordered_json session_json(const PlanSession& session) {
  const SessionParams& params = session.params();
  ordered_json j;
  j["round"] = session.round();
  j["exhausted"] = session.exhausted();
  j["K"] = params.K;
  j["T"] = params.T;
  j["L"] = params.L;
  j["mode"] = to_string(params.mode);
  j["seed"] = session.seed();
  j["config"] = tasp_config_json(session.config());

  const Partitioning& part = session.partitioning();
  ordered_json jp;
  jp["k"] = part.k;
  jp["imbalance"] = part.imbalance;
  jp["cut_weight"] = part.cut_weight;
  jp["assignment"] = part.assignment;
  j["partition"] = jp;

  j["uncertain_edge_count"] = session.network().uncertain_count();
  j["network"] = network_json(session.network());
  j["base_network"] = network_json(session.history().base_network);

  auto history = ordered_json::array();
  for (std::size_t i = 0; i < session.history().rounds.size(); ++i) {
    const RoundRecord& r = session.history().rounds[i];
    ordered_json jr;
    jr["round"] = i + 1;
    jr["recommended"] = r.recommended ? nodes_json(r.recommended->nodes()) : ordered_json(nullptr);
    jr["executed"] = nodes_json(r.executed.nodes());
    jr["deviated"] = r.deviated();
    jr["observations"] = observations_json(r.observations);
    auto map = ordered_json::array();
    for (const auto& m : r.index_map) map.push_back(m ? ordered_json(*m) : ordered_json(nullptr));
    jr["index_map"] = map;
    history.push_back(jr);
  }
  j["history"] = history;
  const auto& cached = session.cached_recommendation();
  j["recommendation"] = cached ? recommendation_json(*cached) : ordered_json(nullptr);
  return j;
}

PlanSession session_from_json(const json& doc) {
  try {
    SessionParams params;
    params.K = doc.at("K").get<std::size_t>();
    params.T = doc.at("T").get<std::size_t>();
    params.L = doc.at("L").get<std::size_t>();
    params.mode = parse_planner_mode(doc.at("mode").get<std::string>());
    const TaspConfig config = tasp_config_from_json(doc.at("config"));
    const auto seed = doc.at("seed").get<std::uint64_t>();

    Partitioning part;
    const auto& jp = doc.at("partition");
    part.k = jp.at("k").get<std::size_t>();
    part.imbalance = jp.at("imbalance").get<double>();
    part.cut_weight = jp.at("cut_weight").get<double>();
    part.assignment = jp.at("assignment").get<std::vector<std::size_t>>();

    std::vector<RoundRecord> rounds;
    for (const auto& jr : doc.at("history")) {
      RoundRecord r;
      if (!jr.at("recommended").is_null()) r.recommended = action_from_json(jr.at("recommended"));
      r.executed = action_from_json(jr.at("executed"));
      r.observations = observations_from_json(jr.at("observations"));
      for (const auto& m : jr.at("index_map")) {
        r.index_map.push_back(m.is_null() ? std::nullopt : std::optional<std::size_t>(m.get<std::size_t>()));
      }
      rounds.push_back(std::move(r));
    }
    std::optional<Recommendation> cached;
    if (doc.contains("recommendation") && !doc.at("recommendation").is_null()) {
      cached = recommendation_from_json(doc.at("recommendation"));
    }
    PlanSession s = PlanSession::restore(network_from_json(doc.at("base_network")), params, config, seed,
                                         std::move(part), std::move(rounds), std::move(cached));
    if (doc.contains("network") && network_from_json(doc.at("network")) != s.network()) {
      throw ValidationError("stored network does not match the replayed history");
    }
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed session document: ") + e.what());
  }
}

}  // namespace dime
