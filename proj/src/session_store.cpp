#include "tvr/session_store.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "tvr/error.hpp"

namespace tvr {

namespace {

MultiScore score_from_json(const Json& j) {
  MultiScore s;
  s.distance = j.at("distance").get<int>();
  s.normalized_distance = j.at("normalized_distance").get<double>();
  s.strict_correct = j.at("strict_correct").get<bool>();
  s.loose_correct = j.at("loose_correct").get<bool>();
  s.reference_length = j.at("reference_length").get<int>();
  return s;
}

bool valid_session_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
  }
  return true;
}

}  // namespace

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json session_to_json(const Session& s) {
  Json j;
  j["id"] = s.id;
  j["user"] = s.user;
  j["setting"] = to_string(s.setting);
  j["cursor"] = s.cursor;
  j["created_at"] = s.created_at;
  j["completed_at"] = s.completed_at;
  Json entries = Json::array();
  for (const auto& e : s.entries) {
    Json ej;
    ej["sample_id"] = e.sample_id;
    ej["answer"] = e.answer ? transformation_to_json(*e.answer) : Json(nullptr);
    ej["score"] = e.score ? multi_score_to_json(*e.score) : Json(nullptr);
    ej["elapsed_ms"] = e.elapsed_ms;
    entries.push_back(std::move(ej));
  }
  j["entries"] = std::move(entries);
  return j;
}

Session session_from_json(const Json& j) {
  Session s;
  s.id = j.at("id").get<std::string>();
  s.user = j.at("user").get<std::string>();
  const auto setting = parse_setting(j.at("setting").get<std::string>());
  if (!setting) throw Error(ErrorCode::kMalformedRecord, "session has unknown setting");
  s.setting = *setting;
  s.cursor = j.at("cursor").get<std::size_t>();
  s.created_at = j.at("created_at").get<std::string>();
  s.completed_at = j.at("completed_at").get<std::string>();
  for (const auto& ej : j.at("entries")) {
    SessionEntry e;
    e.sample_id = ej.at("sample_id").get<std::string>();
    if (!ej.at("answer").is_null()) e.answer = transformation_from_json(ej.at("answer"));
    if (!ej.at("score").is_null()) e.score = score_from_json(ej.at("score"));
    e.elapsed_ms = ej.at("elapsed_ms").get<std::int64_t>();
    s.entries.push_back(std::move(e));
  }
  return s;
}

SessionStore::SessionStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create session store " + dir_.string());
}

void SessionStore::persist(const Session& s) const {
  const auto final_path = dir_ / (s.id + ".json");
  const auto tmp_path = dir_ / (s.id + ".json.tmp");
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp_path.string());
    out << session_to_json(s).dump(2) << '\n';
    if (!out) throw Error(ErrorCode::kIoError, "write failed for " + tmp_path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp_path, final_path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot commit " + final_path.string());
}

Session SessionStore::create(Session session) {
  if (!valid_session_id(session.id)) throw Error(ErrorCode::kInvalidArgument, "invalid session id");
  auto fresh = std::make_shared<Slot>();
  fresh->session = std::move(session);
  std::lock_guard<std::mutex> map_lock(map_mutex_);
  std::lock_guard<std::mutex> lock(fresh->mutex);
  persist(fresh->session);
  slots_[fresh->session.id] = fresh;
  return fresh->session;
}

std::shared_ptr<SessionStore::Slot> SessionStore::slot(const std::string& id) {
  if (!valid_session_id(id)) throw Error(ErrorCode::kUnknownSession, "unknown session '" + id + "'");
  std::lock_guard<std::mutex> map_lock(map_mutex_);
  if (auto it = slots_.find(id); it != slots_.end()) return it->second;

  // Not cached: sessions from an earlier run live on disk.
  const auto path = dir_ / (id + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kUnknownSession, "unknown session '" + id + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  auto loaded = std::make_shared<Slot>();
  try {
    loaded->session = session_from_json(Json::parse(ss.str()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, "corrupt session file " + path.string() + ": " + e.what());
  }
  slots_[id] = loaded;
  return loaded;
}

void SessionStore::update(const std::string& id, const std::function<void(Session&)>& fn) {
  auto s = slot(id);
  std::lock_guard<std::mutex> lock(s->mutex);
  Session working = s->session;
  fn(working);
  persist(working);
  s->session = std::move(working);
}

Session SessionStore::get(const std::string& id) {
  auto s = slot(id);
  std::lock_guard<std::mutex> lock(s->mutex);
  return s->session;
}

}  // namespace tvr
