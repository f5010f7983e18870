#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tvr/dataset_io.hpp"
#include "tvr/metrics.hpp"

namespace tvr {

struct SessionEntry {
  std::string sample_id;
  std::optional<Transformation> answer;
  std::optional<MultiScore> score;
  std::int64_t elapsed_ms = 0;

  bool operator==(const SessionEntry&) const = default;
};

struct Session {
  std::string id;
  std::string user;
  Setting setting = Setting::kEvent;
  std::vector<SessionEntry> entries;
  std::size_t cursor = 0;
  std::string created_at;
  std::string completed_at;  // empty until the last answer

  bool complete() const { return cursor >= entries.size(); }
  bool operator==(const Session&) const = default;
};

Json session_to_json(const Session& s);
Session session_from_json(const Json& j);

// Sessions persisted as one JSON document per session under `dir`. Mutations
// of one session are serialised; different sessions proceed independently.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path dir);

  // Persists a fresh session and returns it.
  Session create(Session session);

  // Runs `fn` on the session under its lock and persists the result.
  // Throws Error(kUnknownSession).
  void update(const std::string& id, const std::function<void(Session&)>& fn);

  // Snapshot. Throws Error(kUnknownSession).
  Session get(const std::string& id);

 private:
  struct Slot {
    std::mutex mutex;
    Session session;
  };

  std::shared_ptr<Slot> slot(const std::string& id);
  void persist(const Session& s) const;

  std::filesystem::path dir_;
  std::mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;
};

// UTC timestamp, ISO-8601 with seconds.
std::string utc_timestamp();

}  // namespace tvr
