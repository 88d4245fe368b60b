#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "dime/heal.hpp"

namespace httplib {
class Server;
}

namespace dime {

struct ServiceOptions {
  std::optional<std::filesystem::path> data_dir;  // journal directory; none keeps sessions in memory
  double budget_ms = 0.0;                         // default TASP time budget per evaluate call
  std::optional<std::filesystem::path> static_dir;
};

struct HttpResult {
  int status = 200;
  std::string body;
};

/// Session store behind the HTTP routes. Each session is journaled as one
/// JSON line per state change in <data_dir>/<id>.jsonl; the last complete line
/// is loaded back on construction.
///
/// Error bodies are {"code", "message"}: 400 invalid input, 404 unknown
/// session, 409 exhausted or concurrent execution, 422 K larger than N.
class SessionService {
 public:
  explicit SessionService(ServiceOptions options = {});

  HttpResult create_session(const std::string& body);
  HttpResult recommendation(const std::string& id);
  HttpResult execution(const std::string& id, const std::string& body);
  HttpResult snapshot(const std::string& id) const;

  std::size_t session_count() const;
  void mount(httplib::Server& server);

 private:
  struct Entry {
    Entry(PlanSession s, std::string created) : session(std::move(s)), created_at(std::move(created)) {}

    std::mutex writer;  // held while planning or recording
    PlanSession session;
    std::string created_at;
    std::string updated_at;
    mutable std::mutex snapshot_mutex;
    std::string snapshot;  // latest published snapshot body
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  void publish(const std::string& id, Entry& entry, const std::string& event);
  void load_journal();

  ServiceOptions options_;
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

}  // namespace dime
