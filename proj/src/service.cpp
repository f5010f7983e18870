#include "tvr/service.hpp"

#include <optional>
#include <random>

#include <httplib.h>

#include "tvr/random.hpp"

namespace tvr {

namespace {

const Json& field(const Json& body, const char* name, ErrorCode code) {
  if (!body.is_object() || !body.contains(name)) {
    throw Error(code, std::string("missing field '") + name + "'");
  }
  return body.at(name);
}

std::string string_field(const Json& body, const char* name) {
  const Json& v = field(body, name, ErrorCode::kInvalidArgument);
  if (!v.is_string()) throw Error(ErrorCode::kInvalidArgument, std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

// Non-negative integer regardless of signed or unsigned JSON storage.
std::optional<std::uint64_t> non_negative(const Json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  return std::nullopt;
}

// Parses an answer and rejects object ids the sample does not have.
Transformation parse_answer(const Json& body, const Sample& sample) {
  Transformation t = transformation_from_json(field(body, "transformations", ErrorCode::kMalformedAnswer));
  for (const auto& a : t) {
    if (!sample.initial.contains(a.object)) {
      throw Error(ErrorCode::kMalformedAnswer,
                  "object " + std::to_string(a.object) + " is not in sample '" + sample.id + "'");
    }
  }
  return t;
}

Json object_table(const SceneGraph& scene) {
  Json rows = objects_to_json(scene);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i]["visible"] = is_visible(scene.objects()[i].position, scene.config());
  }
  return rows;
}

Json entry_json(const SessionEntry& e, const Sample* sample) {
  Json j;
  j["sample_id"] = e.sample_id;
  j["submitted"] = e.answer.has_value();
  j["answer"] = e.answer ? transformation_to_json(*e.answer) : Json(nullptr);
  j["score"] = e.score ? multi_score_to_json(*e.score) : Json(nullptr);
  j["elapsed_ms"] = e.elapsed_ms;
  // References stay hidden until the sample has been answered.
  j["reference"] = e.answer && sample != nullptr ? transformation_to_json(sample->reference) : Json(nullptr);
  return j;
}

std::string new_session_id(std::uint64_t counter) {
  static thread_local std::mt19937_64 gen{std::random_device{}()};
  char buf[40];
  std::snprintf(buf, sizeof(buf), "s%016llx%04llx", static_cast<unsigned long long>(gen()),
                static_cast<unsigned long long>(counter & 0xffff));
  return buf;
}

}  // namespace

EvalService::EvalService(std::vector<Dataset> datasets, ServiceOptions options)
    : index_(std::move(datasets)), options_(std::move(options)), sessions_(options_.session_dir) {}

const Sample& EvalService::sample_or_throw(const std::string& id) const {
  const Sample* s = index_.find(id);
  if (s == nullptr) throw Error(ErrorCode::kNotFound, "unknown sample id '" + id + "'");
  return *s;
}

Json EvalService::get_sample(const std::string& id) const {
  const Sample& s = sample_or_throw(id);
  Json j = sample_to_json(s);
  if (!options_.trusted) j.erase("transformations");
  j["final_objects"] = objects_to_json(s.final_scene);
  return j;
}

Json EvalService::evaluate(const Json& body) const {
  const Json& list = field(body, "predictions", ErrorCode::kInvalidArgument);
  if (!list.is_array()) throw Error(ErrorCode::kInvalidArgument, "'predictions' must be an array");
  std::vector<Prediction> preds;
  preds.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) preds.push_back(prediction_from_json(list[i], i + 1));
  const EvaluationResult result = evaluate_predictions(index_, preds, options_.jobs);
  Json scores = Json::array();
  for (std::size_t i = 0; i < result.ids.size(); ++i) {
    Json row;
    row["id"] = result.ids[i];
    const Json fields = multi_score_to_json(result.scores[i]);
    for (auto& [k, v] : fields.items()) row[k] = v;
    scores.push_back(std::move(row));
  }
  Json out;
  out["scores"] = std::move(scores);
  out["report"] = evaluation_report_json(result);
  return out;
}

Json EvalService::reward(const Json& body) const {
  auto one = [this](const Json& q) {
    const Sample& s = sample_or_throw(string_field(q, "id"));
    const Transformation t = transformation_from_json(field(q, "transformations", ErrorCode::kMalformedAnswer));
    const std::string kind_token = q.contains("kind") ? string_field(q, "kind") : "corr";
    const auto kind = parse_reward_kind(kind_token);
    if (!kind) throw Error(ErrorCode::kInvalidArgument, "unknown reward kind '" + kind_token + "'");
    Json r;
    r["id"] = s.id;
    r["kind"] = to_string(*kind);
    r["reward"] = tvr::reward(t, s, *kind);
    return r;
  };
  if (body.is_object() && body.contains("queries")) {
    const Json& qs = body.at("queries");
    if (!qs.is_array()) throw Error(ErrorCode::kInvalidArgument, "'queries' must be an array");
    Json out;
    out["rewards"] = Json::array();
    for (const auto& q : qs) out["rewards"].push_back(one(q));
    return out;
  }
  return one(body);
}

Json EvalService::stats(const std::string& split) const {
  const GeneratorConfig* cfg = index_.config_for_split(split);
  if (cfg == nullptr) throw Error(ErrorCode::kNotFound, "unknown split '" + split + "'");
  Json j;
  j["split"] = split;
  j["stats"] = stats_report(index_.split(split), *cfg);
  return j;
}

Json EvalService::solution(const std::string& id) const {
  if (!options_.trusted) throw Error(ErrorCode::kForbidden, "solutions are only served in trusted mode");
  const Sample& s = sample_or_throw(id);
  Json j;
  j["id"] = s.id;
  j["reference"] = transformation_to_json(s.reference);
  j["solved"] = transformation_to_json(solve(s.initial, s.final_scene));
  return j;
}

std::string EvalService::render(const std::string& id, const std::string& state,
                                const std::string& view) const {
  const Sample& s = sample_or_throw(id);
  View v = s.view;
  if (!view.empty()) {
    const auto parsed = parse_view(view);
    if (!parsed) throw Error(ErrorCode::kInvalidArgument, "unknown view '" + view + "'");
    v = *parsed;
  }
  if (state.empty() || state == "initial") return render_schematic(s.initial, view.empty() ? View::kCenter : v);
  if (state == "final") return render_schematic(s.final_scene, v);
  throw Error(ErrorCode::kInvalidArgument, "state must be 'initial' or 'final'");
}

Json EvalService::create_session(const Json& body) {
  Session session;
  session.user = string_field(body, "user");
  const std::string setting_token = string_field(body, "setting");
  const auto setting = parse_setting(setting_token);
  if (!setting) throw Error(ErrorCode::kInvalidArgument, "unknown setting '" + setting_token + "'");
  session.setting = *setting;
  const std::string split = body.contains("split") ? string_field(body, "split") : "";
  std::size_t count = options_.default_session_size;
  if (body.contains("count")) {
    const auto n = non_negative(body.at("count"));
    if (!n || *n == 0) throw Error(ErrorCode::kInvalidArgument, "'count' must be a positive integer");
    count = static_cast<std::size_t>(*n);
  }

  std::vector<std::string> ids;
  for (const auto& s : index_.samples()) {
    if (s.setting == session.setting && (split.empty() || s.split == split)) ids.push_back(s.id);
  }
  if (ids.empty()) throw Error(ErrorCode::kNotFound, "no samples for setting '" + setting_token + "'");
  if (body.contains("seed")) {
    const auto seed = non_negative(body.at("seed"));
    if (!seed) throw Error(ErrorCode::kInvalidArgument, "'seed' must be an unsigned integer");
    Rng rng(*seed);
    rng.shuffle(ids);
  }
  ids.resize(std::min(count, ids.size()));
  for (auto& id : ids) session.entries.push_back(SessionEntry{std::move(id), std::nullopt, std::nullopt, 0});

  session.id = new_session_id(session_counter_.fetch_add(1));
  session.created_at = utc_timestamp();
  const Session created = sessions_.create(std::move(session));
  Json j;
  j["session_id"] = created.id;
  j["user"] = created.user;
  j["setting"] = to_string(created.setting);
  j["total"] = created.entries.size();
  j["created_at"] = created.created_at;
  return j;
}

Json EvalService::next_sample(const std::string& session_id) {
  const Session s = sessions_.get(session_id);
  if (s.complete()) throw Error(ErrorCode::kSessionComplete, "session '" + session_id + "' is complete");
  const Sample& sample = sample_or_throw(s.entries[s.cursor].sample_id);
  Json j;
  j["session_id"] = s.id;
  j["position"] = s.cursor;
  j["total"] = s.entries.size();
  j["sample_id"] = sample.id;
  j["setting"] = to_string(sample.setting);
  j["view"] = to_string(sample.view);
  j["initial_svg"] = render_schematic(sample.initial, View::kCenter);
  j["final_svg"] = render_schematic(sample.final_scene, sample.view);
  j["objects"] = object_table(sample.initial);
  j["vocabulary"] = vocabulary();
  return j;
}

Json EvalService::submit_answer(const std::string& session_id, const Json& body) {
  std::int64_t elapsed = 0;
  if (body.is_object() && body.contains("elapsed_ms")) {
    if (!body.at("elapsed_ms").is_number_integer() || body.at("elapsed_ms").get<std::int64_t>() < 0) {
      throw Error(ErrorCode::kMalformedAnswer, "'elapsed_ms' must be a non-negative integer");
    }
    elapsed = body.at("elapsed_ms").get<std::int64_t>();
  }
  Json out;
  sessions_.update(session_id, [&](Session& s) {
    if (s.complete()) throw Error(ErrorCode::kSessionComplete, "session '" + session_id + "' is complete");
    SessionEntry& entry = s.entries[s.cursor];
    const Sample& sample = sample_or_throw(entry.sample_id);
    const Transformation answer = parse_answer(body, sample);
    entry.answer = answer;
    entry.score = eval_multi(answer, sample);
    entry.elapsed_ms = elapsed;
    ++s.cursor;
    if (s.complete()) s.completed_at = utc_timestamp();

    out = entry_json(entry, &sample);
    out["position"] = s.cursor - 1;
    out["cursor"] = s.cursor;
    out["total"] = s.entries.size();
    out["complete"] = s.complete();
  });
  return out;
}

Json EvalService::session_report(const std::string& session_id) {
  const Session s = sessions_.get(session_id);
  Json j;
  j["session_id"] = s.id;
  j["user"] = s.user;
  j["setting"] = to_string(s.setting);
  j["created_at"] = s.created_at;
  j["completed_at"] = s.completed_at.empty() ? Json(nullptr) : Json(s.completed_at);
  j["cursor"] = s.cursor;
  j["total"] = s.entries.size();
  j["complete"] = s.complete();
  Json entries = Json::array();
  std::vector<MultiScore> scores;
  for (const auto& e : s.entries) {
    entries.push_back(entry_json(e, index_.find(e.sample_id)));
    if (e.score) scores.push_back(*e.score);
  }
  j["entries"] = std::move(entries);
  j["report"] = scores.empty() ? Json(nullptr) : aggregate_to_json(aggregate(scores));
  return j;
}

Json EvalService::vocabulary() {
  Json j = Json::array();
  for (const auto& v : all_values()) {
    j.push_back({{"index", v.index()}, {"token", v.token()}, {"attribute", to_string(v.attribute())}});
  }
  return j;
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kUnknownSession: return 404;
    case ErrorCode::kSessionComplete: return 409;
    case ErrorCode::kForbidden: return 403;
    case ErrorCode::kIoError: return 500;
    default: return 400;
  }
}

Json error_json(ErrorCode code, const std::string& message) {
  Json j;
  j["code"] = to_string(code);
  j["message"] = message;
  return j;
}

std::pair<std::string, int> parse_address(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size()) {
    throw Error(ErrorCode::kInvalidArgument, "address must be HOST:PORT, got '" + addr + "'");
  }
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(addr.substr(colon + 1), &used);
    if (used != addr.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "bad port in '" + addr + "'");
  }
  if (port < 0 || port > 65535) throw Error(ErrorCode::kInvalidArgument, "port out of range in '" + addr + "'");
  return {addr.substr(0, colon), port};
}

// --- HTTP binding ------------------------------------------------------------

struct HttpServer::Impl {
  EvalService& service;
  httplib::Server server;

  explicit Impl(EvalService& s) : service(s) {}

  static void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  template <typename Fn>
  static void guarded(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      send_json(res, http_status(e.code()), error_json(e.code(), e.what()));
    } catch (const nlohmann::json::exception& e) {
      send_json(res, 400, error_json(ErrorCode::kInvalidArgument, e.what()));
    } catch (const std::exception& e) {
      send_json(res, 500, error_json(ErrorCode::kIoError, std::string("internal error: ") + e.what()));
    }
  }

  static Json parse_body(const httplib::Request& req) {
    try {
      return Json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kInvalidArgument, std::string("body is not valid JSON: ") + e.what());
    }
  }

  void routes() {
    auto& svc = service;
    server.set_tcp_nodelay(true);
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/vocabulary", [](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, EvalService::vocabulary()); });
    });
    server.Get(R"(/samples/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, svc.get_sample(req.matches[1])); });
    });
    server.Get(R"(/samples/([^/]+)/solution)", [&svc](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, svc.solution(req.matches[1])); });
    });
    server.Get(R"(/samples/([^/]+)/render)", [&svc](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string svg = svc.render(req.matches[1], req.get_param_value("state"),
                                           req.get_param_value("view"));
        res.status = 200;
        res.set_content(svg, "image/svg+xml");
      });
    });
    server.Post("/evaluate", [&svc](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, svc.evaluate(parse_body(req))); });
    });
    server.Post("/reward", [&svc](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, svc.reward(parse_body(req))); });
    });
    server.Get(R"(/stats/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, svc.stats(req.matches[1])); });
    });
    server.Post("/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 201, svc.create_session(parse_body(req))); });
    });
    server.Get(R"(/sessions/([^/]+)/next)", [&svc](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, svc.next_sample(req.matches[1])); });
    });
    server.Post(R"(/sessions/([^/]+)/answer)", [&svc](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, svc.submit_answer(req.matches[1], parse_body(req))); });
    });
    server.Get(R"(/sessions/([^/]+)/report)", [&svc](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, svc.session_report(req.matches[1])); });
    });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (res.status == 404 && res.body.empty()) {
        send_json(res, 404, error_json(ErrorCode::kNotFound, "no route for " + req.method + " " + req.path));
      }
    });
  }
};

HttpServer::HttpServer(EvalService& service) : impl_(std::make_unique<Impl>(service)) { impl_->routes(); }

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::kIoError, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::kIoError, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace tvr
