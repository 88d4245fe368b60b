#include "dime/service.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "dime/errors.hpp"
#include "dime/session_json.hpp"

namespace dime {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

HttpResult error(int status, const std::string& code, const std::string& message) {
  ordered_json j;
  j["code"] = code;
  j["message"] = message;
  return {status, j.dump()};
}

template <typename F>
HttpResult guarded(F&& f) {
  try {
    return f();
  } catch (const ValidationError& e) {
    return error(400, "invalid_request", e.what());
  } catch (const CapacityError& e) {
    return error(422, "capacity", e.what());
  } catch (const StateError& e) {
    return error(409, "conflict", e.what());
  } catch (const json::exception& e) {
    return error(400, "invalid_request", e.what());
  } catch (const std::exception& e) {
    return error(500, "internal", e.what());
  }
}

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON body: ") + e.what());
  }
}

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string new_session_id() {
  static std::mutex m;
  static std::mt19937_64 gen{std::random_device{}()};
  std::lock_guard lock(m);
  std::ostringstream out;
  out << std::hex << gen();
  return out.str();
}

std::size_t positive_count(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ValidationError(std::string("missing field ") + key);
  const json& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ValidationError(std::string(key) + " must be a positive integer");
  }
  return v.get<std::size_t>();
}

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    if (!std::isalnum(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

SessionService::SessionService(ServiceOptions options) : options_(std::move(options)) {
  if (options_.data_dir) {
    std::filesystem::create_directories(*options_.data_dir);
    load_journal();
  }
}

void SessionService::load_journal() {
  for (const auto& file : std::filesystem::directory_iterator(*options_.data_dir)) {
    if (file.path().extension() != ".jsonl") continue;
    const std::string id = file.path().stem().string();
    if (!valid_id(id)) continue;
    std::ifstream in(file.path());
    std::string line;
    std::optional<json> last;
    while (std::getline(in, line)) {
      try {
        last = json::parse(line);
      } catch (const json::parse_error&) {
        // a torn trailing write; keep the previous state
      }
    }
    if (!last) continue;
    auto entry = std::make_shared<Entry>(session_from_json(last->at("snapshot")),
                                         last->value("created_at", std::string()));
    entry->updated_at = last->value("at", std::string());
    ordered_json snap;
    snap["session_id"] = id;
    snap["created_at"] = entry->created_at;
    snap["updated_at"] = entry->updated_at;
    snap.update(session_json(entry->session));
    entry->snapshot = snap.dump();
    sessions_[id] = std::move(entry);
  }
}

std::size_t SessionService::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

std::shared_ptr<SessionService::Entry> SessionService::find(const std::string& id) const {
  std::lock_guard lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

void SessionService::publish(const std::string& id, Entry& entry, const std::string& event) {
  entry.updated_at = now_utc();
  ordered_json snap;
  snap["session_id"] = id;
  snap["created_at"] = entry.created_at;
  snap["updated_at"] = entry.updated_at;
  const ordered_json state = session_json(entry.session);
  snap.update(state);
  if (options_.data_dir) {
    ordered_json line;
    line["event"] = event;
    line["at"] = entry.updated_at;
    line["created_at"] = entry.created_at;
    line["snapshot"] = state;
    std::ofstream out(*options_.data_dir / (id + ".jsonl"), std::ios::app);
    out << line.dump() << '\n';
    out.flush();
  }
  std::lock_guard lock(entry.snapshot_mutex);
  entry.snapshot = snap.dump();
}

HttpResult SessionService::create_session(const std::string& body) {
  return guarded([&]() -> HttpResult {
    const json doc = parse_body(body);
    if (!doc.is_object()) throw ValidationError("request body must be a JSON object");
    if (!doc.contains("network")) throw ValidationError("missing field network");
    const LoadResult loaded = load_network(doc.at("network").dump());
    SessionParams params;
    params.K = positive_count(doc, "K");
    params.T = positive_count(doc, "T");
    params.L = positive_count(doc, "L");
    params.mode = parse_planner_mode(doc.value("mode", std::string("heal")));
    TaspConfig defaults;
    defaults.time_budget_ms = options_.budget_ms;
    const TaspConfig config = tasp_config_from_json(doc.value("config", json(nullptr)), defaults);
    std::uint64_t seed = 0;
    if (doc.contains("seed") && !doc.at("seed").is_null()) {
      if (!doc.at("seed").is_number_unsigned()) throw ValidationError("seed must be a non-negative integer");
      seed = doc.at("seed").get<std::uint64_t>();
    } else {
      seed = std::random_device{}();
    }

    auto entry = std::make_shared<Entry>(PlanSession::start(loaded.network, params, config, seed), now_utc());
    const std::string id = new_session_id();
    publish(id, *entry, "created");
    {
      std::lock_guard lock(sessions_mutex_);
      sessions_[id] = entry;
    }
    ordered_json out;
    out["session_id"] = id;
    out["round"] = entry->session.round();
    out["n_nodes"] = entry->session.network().node_count();
    out["uncertain_edge_count"] = entry->session.network().uncertain_count();
    out["promoted_to_certain"] = loaded.promoted_to_certain;
    out["dropped_zero_u"] = loaded.dropped_zero_u;
    out["seed"] = seed;
    return {201, out.dump()};
  });
}

HttpResult SessionService::recommendation(const std::string& id) {
  const auto entry = find(id);
  if (!entry) return error(404, "not_found", "unknown session " + id);
  return guarded([&]() -> HttpResult {
    std::lock_guard lock(entry->writer);
    const bool fresh = !entry->session.cached_recommendation();
    const Recommendation& rec = entry->session.recommend();
    const std::string body = recommendation_json(rec).dump();
    if (fresh) publish(id, *entry, "recommended");
    return {200, body};
  });
}

HttpResult SessionService::execution(const std::string& id, const std::string& body) {
  const auto entry = find(id);
  if (!entry) return error(404, "not_found", "unknown session " + id);
  std::unique_lock lock(entry->writer, std::try_to_lock);
  if (!lock.owns_lock()) return error(409, "conflict", "another request is updating this session");
  return guarded([&]() -> HttpResult {
    const json doc = parse_body(body);
    if (!doc.is_object()) throw ValidationError("request body must be a JSON object");
    PlanSession& session = entry->session;
    if (session.exhausted()) throw StateError("session exhausted");
    if (doc.contains("round") && doc.at("round").get<std::size_t>() != session.round()) {
      throw StateError("round " + doc.at("round").dump() + " was already recorded; current round is " +
                       std::to_string(session.round()));
    }
    if (!doc.contains("executed") || !doc.at("executed").is_array()) {
      throw ValidationError("executed must be an array of node ids");
    }
    std::vector<NodeId> nodes;
    for (const auto& v : doc.at("executed")) {
      if (!v.is_number_integer() || v.get<long long>() < 0) throw ValidationError("node ids must be non-negative integers");
      nodes.push_back(v.get<NodeId>());
    }
    const ActionSet executed(std::move(nodes));
    std::vector<EdgeObservation> obs;
    if (doc.contains("observations")) {
      for (const auto& j : doc.at("observations")) {
        const auto idx = j.at("edge_index").get<long long>();
        if (idx < 0) throw ValidationError("edge_index must be non-negative");
        obs.push_back({static_cast<std::size_t>(idx), j.at("exists").get<bool>()});
      }
    }
    const ExecutionReport report = session.record_execution(executed, obs);
    publish(id, *entry, "executed");
    ordered_json out;
    out["recorded_round"] = report.round;
    out["round"] = session.round();
    out["exhausted"] = session.exhausted();
    out["updated_uncertain_edge_count"] = report.uncertain_edges_remaining;
    out["unexpected_observations"] = report.unexpected_observations;
    out["deviated"] = report.deviated;
    return {200, out.dump()};
  });
}

HttpResult SessionService::snapshot(const std::string& id) const {
  const auto entry = find(id);
  if (!entry) return error(404, "not_found", "unknown session " + id);
  std::lock_guard lock(entry->snapshot_mutex);
  return {200, entry->snapshot};
}

void SessionService::mount(httplib::Server& server) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  auto reply = [](httplib::Response& res, const HttpResult& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Post("/sessions", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, create_session(req.body));
  });
  server.Get(R"(/sessions/([A-Za-z0-9]+)/recommendation)",
             [this, reply](const httplib::Request& req, httplib::Response& res) {
               reply(res, recommendation(req.matches[1]));
             });
  server.Post(R"(/sessions/([A-Za-z0-9]+)/execution)",
              [this, reply](const httplib::Request& req, httplib::Response& res) {
                reply(res, execution(req.matches[1], req.body));
              });
  server.Get(R"(/sessions/([A-Za-z0-9]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, snapshot(req.matches[1]));
  });
  if (options_.static_dir) server.set_mount_point("/", options_.static_dir->string());
}

}  // namespace dime
