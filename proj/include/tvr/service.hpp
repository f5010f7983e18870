#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "tvr/dataset_io.hpp"
#include "tvr/error.hpp"
#include "tvr/evaluation.hpp"
#include "tvr/session_store.hpp"

namespace tvr {

struct ServiceOptions {
  // Trusted mode exposes reference transformations and solver output.
  bool trusted = false;
  std::filesystem::path session_dir = "sessions";
  unsigned jobs = 1;
  std::size_t default_session_size = 10;
};

// Request handlers over JSON documents. Every method throws tvr::Error on
// bad input; the HTTP layer maps codes to statuses.
class EvalService {
 public:
  EvalService(std::vector<Dataset> datasets, ServiceOptions options);

  const SampleIndex& index() const { return index_; }
  const ServiceOptions& options() const { return options_; }

  // Record plus `final_objects`; `transformations` only in trusted mode.
  Json get_sample(const std::string& id) const;
  // Body {"predictions": [records]} -> {"scores": [...], "report": {...}}.
  Json evaluate(const Json& body) const;
  // Body {id, transformations, kind} or {"queries": [...]}.
  Json reward(const Json& body) const;
  Json stats(const std::string& split) const;
  Json solution(const std::string& id) const;
  // state is "initial" or "final"; view defaults to the sample's own view.
  std::string render(const std::string& id, const std::string& state,
                     const std::string& view) const;

  // Body {user, setting, split?, count?, seed?}.
  Json create_session(const Json& body);
  Json next_sample(const std::string& session_id);
  // Body {transformations, elapsed_ms?}.
  Json submit_answer(const std::string& session_id, const Json& body);
  Json session_report(const std::string& session_id);

  static Json vocabulary();

 private:
  const Sample& sample_or_throw(const std::string& id) const;

  SampleIndex index_;
  ServiceOptions options_;
  SessionStore sessions_;
  std::atomic<std::uint64_t> session_counter_{0};
};

// HTTP status for a structured error code.
int http_status(ErrorCode code);
Json error_json(ErrorCode code, const std::string& message);

// Thin HTTP binding of EvalService.
class HttpServer {
 public:
  explicit HttpServer(EvalService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds `host:port`; port 0 picks a free port. Throws Error(kIoError).
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// "host:port" -> pair. Throws Error(kInvalidArgument).
std::pair<std::string, int> parse_address(const std::string& addr);

}  // namespace tvr
