// Copyright 2026 The qruntime Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qrt/api/service.hpp"

#include <fstream>
#include <sstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "qrt/api/schema.hpp"
#include "qrt/core/error.hpp"

namespace qrt::api {

namespace {

using nlohmann::json;

const std::map<std::string, int>& status_table() {
  static const std::map<std::string, int> table{
      {codes::kAuthFailed, 401},
      {codes::kForbidden, 403},
      {codes::kUnknownJob, 404},
      {codes::kUnknownSession, 404},
      {codes::kUnknownWorker, 404},
      {codes::kUnknownBackend, 404},
      {codes::kNotFound, 404},
      {codes::kCapabilityMissing, 409},
      {codes::kConflict, 409},
      {codes::kNotReady, 409},
      {codes::kJobFailed, 409},
      {codes::kJobCancelled, 409},
      {codes::kIllegalTransition, 409},
      {codes::kNoCapableBackend, 409},
      {codes::kUserLimitExceeded, 429},
      {codes::kAdapterUnavailable, 503},
      {codes::kStorageFailure, 500},
      {codes::kInternal, 500},
  };
  return table;
}

json error_body(const std::string& code, const std::string& message, const json& details) {
  return {{"code", code}, {"message", message}, {"details", details.is_object() ? details : json::object()}};
}

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  send(res, http_status(e.code()), error_body(e.code(), e.what(), e.details()));
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) throw Error(codes::kSchemaViolation, "request body is empty", {{"field", ""}});
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(codes::kSchemaViolation, std::string("request body is not JSON: ") + e.what(),
                {{"field", ""}, {"reason", "invalid JSON"}});
  }
}

std::string bearer_token(const httplib::Request& req) {
  const auto header = req.get_header_value("Authorization");
  const std::string prefix = "Bearer ";
  if (header.rfind(prefix, 0) != 0) return {};
  return header.substr(prefix.size());
}

}  // namespace

std::shared_ptr<StaticTokenVerifier> StaticTokenVerifier::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(codes::kInvalidArgument, "cannot read token file " + path, {{"path", path}});
  std::map<std::string, std::string> tokens;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string token;
    std::string user;
    std::string extra;
    if (!(fields >> token)) continue;
    if (!(fields >> user) || (fields >> extra)) {
      throw Error(codes::kInvalidArgument, path + ":" + std::to_string(n) + ": expected 'token user'",
                  {{"path", path}, {"line", n}});
    }
    tokens[token] = user;
  }
  return std::make_shared<StaticTokenVerifier>(std::move(tokens));
}

std::optional<std::string> StaticTokenVerifier::user_for(const std::string& token) const {
  auto it = tokens_.find(token);
  if (token.empty() || it == tokens_.end()) return std::nullopt;
  return it->second;
}

int http_status(const std::string& code) {
  const auto& table = status_table();
  auto it = table.find(code);
  return it == table.end() ? 400 : it->second;
}

struct HttpServer::Impl {
  Impl(Platform& p, std::shared_ptr<const TokenVerifier> v) : platform(p), verifier(std::move(v)) {}

  Platform& platform;
  std::shared_ptr<const TokenVerifier> verifier;
  httplib::Server server;

  using Handler = std::function<void(const httplib::Request&, httplib::Response&, const std::string& user)>;

  // Authenticates, runs the handler, maps errors to the wire error body and
  // checks 2xx bodies against `response_schema`.
  httplib::Server::Handler wrap(Handler h, std::string response_schema, bool authenticated = true) {
    return [this, h = std::move(h), response_schema = std::move(response_schema), authenticated](
               const httplib::Request& req, httplib::Response& res) {
      try {
        std::string user;
        if (authenticated) {
          auto who = verifier->user_for(bearer_token(req));
          if (!who) throw Error(codes::kAuthFailed, "missing or invalid bearer token");
          user = *who;
        }
        h(req, res, user);
        if (res.status < 300 && !response_schema.empty()) {
          try {
            wire::validate(response_schema, json::parse(res.body));
          } catch (const Error& e) {
            spdlog::error("{} {}: response does not match {}: {}", req.method, req.path, response_schema, e.what());
            throw Error(codes::kInternal, "response failed schema validation", {{"schema", response_schema}});
          }
        }
      } catch (const Error& e) {
        send_error(res, e);
      } catch (const std::exception& e) {
        spdlog::error("{} {}: {}", req.method, req.path, e.what());
        send(res, 500, error_body(codes::kInternal, e.what(), json::object()));
      }
      spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
    };
  }

  void routes() {
    server.Get("/v1/health", wrap(
                                 [this](const httplib::Request&, httplib::Response& res, const std::string&) {
                                   send(res, 200,
                                        {{"status", "ok"},
                                         {"version", kVersion},
                                         {"last_seq", platform.last_seq()}});
                                 },
                                 "health", false));

    server.Post("/v1/jobs", wrap(
                                [this](const httplib::Request& req, httplib::Response& res, const std::string& user) {
                                  const json body = parse_body(req);
                                  wire::validate("job_descriptor", body);
                                  const auto r =
                                      platform.submit(user, body, req.get_header_value("Idempotency-Key"));
                                  const auto st = platform.job_status(user, r.job_id);
                                  send(res, r.created ? 201 : 200,
                                       {{"job_id", r.job_id}, {"created", r.created}, {"status", st["status"]}});
                                },
                                "job_created"));
    server.Get("/v1/jobs", wrap(
                               [this](const httplib::Request&, httplib::Response& res, const std::string& user) {
                                 send(res, 200, {{"jobs", platform.list_jobs(user)}});
                               },
                               "job_list"));
    server.Get(R"(/v1/jobs/([^/]+))",
               wrap(
                   [this](const httplib::Request& req, httplib::Response& res, const std::string& user) {
                     send(res, 200, platform.job_status(user, req.matches[1]));
                   },
                   "job_status"));
    server.Get(R"(/v1/jobs/([^/]+)/results)",
               wrap(
                   [this](const httplib::Request& req, httplib::Response& res, const std::string& user) {
                     send(res, 200, platform.job_results(user, req.matches[1]));
                   },
                   "job_results"));
    server.Delete(R"(/v1/jobs/([^/]+))",
                  wrap(
                      [this](const httplib::Request& req, httplib::Response& res, const std::string& user) {
                        send(res, 200, platform.cancel(user, req.matches[1]));
                      },
                      "job_status"));

    server.Post("/v1/sessions",
                wrap(
                    [this](const httplib::Request& req, httplib::Response& res, const std::string& user) {
                      const json body = parse_body(req);
                      wire::validate("session_request", body);
                      std::optional<Duration> ttl;
                      if (body.contains("ttl_seconds")) ttl = from_seconds(body["ttl_seconds"].get<double>());
                      send(res, 201, platform.open_session(user, body["backend_id"].get<std::string>(), ttl));
                    },
                    "session"));
    server.Get(R"(/v1/sessions/([^/]+))",
               wrap(
                   [this](const httplib::Request& req, httplib::Response& res, const std::string& user) {
                     send(res, 200, platform.session(user, req.matches[1]));
                   },
                   "session"));
    server.Delete(R"(/v1/sessions/([^/]+))",
                  wrap(
                      [this](const httplib::Request& req, httplib::Response& res, const std::string& user) {
                        send(res, 200, platform.close_session(user, req.matches[1]));
                      },
                      "session"));

    server.Post("/v1/reservations",
                wrap(
                    [this](const httplib::Request& req, httplib::Response& res, const std::string& user) {
                      const json body = parse_body(req);
                      wire::validate("reservation_request", body);
                      const Duration duration = body.contains("duration_minutes")
                                                    ? from_seconds(body["duration_minutes"].get<double>() * 60.0)
                                                    : kDefaultReservation;
                      send(res, 201,
                           platform.reserve(user, body["backend_id"].get<std::string>(),
                                            parse_iso8601(body["start"].get<std::string>()), duration));
                    },
                    "reservation"));
    server.Get("/v1/reservations", wrap(
                                       [this](const httplib::Request&, httplib::Response& res, const std::string&) {
                                         send(res, 200, {{"reservations", platform.reservations()}});
                                       },
                                       "reservation_list"));

    server.Get("/v1/backends", wrap(
                                   [this](const httplib::Request&, httplib::Response& res, const std::string&) {
                                     send(res, 200, {{"backends", platform.backends()}});
                                   },
                                   "backend_list"));
    server.Get(R"(/v1/backends/([^/]+)/calibration)",
               wrap(
                   [this](const httplib::Request& req, httplib::Response& res, const std::string&) {
                     const auto refresh = req.get_param_value("refresh");
                     if (!refresh.empty() && refresh != "true" && refresh != "false") {
                       throw Error(codes::kInvalidArgument, "refresh must be true or false", {{"field", "refresh"}});
                     }
                     send(res, 200, platform.calibration(req.matches[1], refresh == "true"));
                   },
                   "calibration"));

    server.Post("/v1/workers/register",
                wrap(
                    [this](const httplib::Request& req, httplib::Response& res, const std::string&) {
                      const json body = parse_body(req);
                      wire::validate("worker_registration", body);
                      WorkerInfo w;
                      w.worker_id = body["worker_id"].get<std::string>();
                      w.stages = body["stages"].get<std::set<std::string>>();
                      w.backends = body["backends"].get<std::set<std::string>>();
                      w.max_parallel = body.value("max_parallel", 1);
                      send(res, 200, platform.register_worker(w));
                    },
                    "worker"));
    server.Put(R"(/v1/workers/([^/]+)/heartbeat)",
               wrap(
                   [this](const httplib::Request& req, httplib::Response& res, const std::string&) {
                     send(res, 200, platform.heartbeat(req.matches[1]));
                   },
                   "worker"));

    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      if (res.status == 404) {
        send(res, 404, error_body(codes::kNotFound, "no route for " + req.method + " " + req.path, json::object()));
      } else {
        send(res, res.status, error_body(codes::kInternal, "HTTP " + std::to_string(res.status), json::object()));
      }
    });
  }
};

HttpServer::HttpServer(Platform& platform, std::shared_ptr<const TokenVerifier> verifier)
    : impl_(std::make_unique<Impl>(platform, std::move(verifier))) {
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) {
    throw Error(codes::kInvalidArgument, "cannot listen on " + host + ":" + std::to_string(port),
                {{"host", host}, {"port", port}});
  }
  return bound;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace qrt::api
