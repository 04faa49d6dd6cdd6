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

// qruntime: run the service or drive it over HTTP.
//
// Exit codes: 0 success, 1 request or usage error (code on stderr), 2 job
// ended FAILED or CANCELLED under --wait.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "qrt/api/service.hpp"
#include "qrt/core/error.hpp"

using nlohmann::json;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? v : fallback;
}

struct ClientOptions {
  std::string endpoint = env_or("QRUNTIME_ENDPOINT", "http://127.0.0.1:8080");
  std::string token = env_or("QRUNTIME_TOKEN", "");
  bool json_out = false;
};

class Client {
 public:
  explicit Client(const ClientOptions& o) : cli_(o.endpoint), token_(o.token) {
    cli_.set_connection_timeout(5, 0);
    cli_.set_read_timeout(60, 0);
  }

  json request(const std::string& method, const std::string& path, const json& body = nullptr,
               httplib::Headers headers = {}) {
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
    httplib::Result r;
    if (method == "GET") {
      r = cli_.Get(path, headers);
    } else if (method == "POST") {
      r = cli_.Post(path, headers, body.dump(), "application/json");
    } else {
      r = cli_.Delete(path, headers);
    }
    if (!r) {
      throw qrt::Error("CONNECTION_FAILED", "cannot reach server: " + httplib::to_string(r.error()));
    }
    json out;
    try {
      out = json::parse(r->body);
    } catch (const json::parse_error&) {
      throw qrt::Error(qrt::codes::kInternal, "server sent a non-JSON body (HTTP " + std::to_string(r->status) + ")");
    }
    if (r->status >= 400) {
      throw qrt::Error(out.value("code", std::string(qrt::codes::kInternal)), out.value("message", std::string()),
                       out.value("details", json::object()));
    }
    return out;
  }

 private:
  httplib::Client cli_;
  std::string token_;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qrt::Error(qrt::codes::kInvalidArgument, "cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw qrt::Error(qrt::codes::kSchemaViolation, path + ": " + e.what());
  }
}

bool terminal(const std::string& status) {
  return status == "COMPLETED" || status == "FAILED" || status == "CANCELLED";
}

void print_status(const json& st) {
  std::cout << st["job_id"].get<std::string>() << "  " << st["status"].get<std::string>() << "  "
            << st["backend_id"].get<std::string>() << "\n";
  const auto& p = st["progress"];
  if (p.contains("completed_items")) {
    std::cout << "  progress: " << p["completed_items"] << "/" << p["total"] << " items\n";
  } else {
    std::cout << "  progress: iteration " << p["iteration"] << "/" << p["total"] << "\n";
  }
  if (!st["eta_seconds"].is_null()) {
    std::cout << "  eta: " << st["eta_seconds"].get<double>() << " s (" << st["estimated_completion"].get<std::string>()
              << ")\n";
  }
  if (!st["error"].is_null()) {
    std::cout << "  error: " << st["error"]["code"].get<std::string>() << ": "
              << st["error"]["message"].get<std::string>() << "\n";
  }
}

int serve(const std::string& config_path, int port_override) {
  auto config = qrt::load_config(config_path);
  if (port_override >= 0) config.port = port_override;
  spdlog::set_level(spdlog::level::from_str(config.log_level));
  auto verifier = qrt::api::StaticTokenVerifier::from_file(config.token_file);

  // Blocked here, before any thread starts; the waiter takes them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  qrt::SystemClock clock;
  qrt::Platform platform(config, clock);
  qrt::api::HttpServer server(platform, verifier);
  const int port = server.bind(config.host, config.port);
  platform.start();

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("signal {}, shutting down", sig);
    server.stop();
  });

  std::string ids;
  for (const auto& d : config.fleet) ids += (ids.empty() ? "" : ", ") + d.backend_id;
  std::cout << "qruntime ready on http://" << config.host << ":" << port << " (backends: " << ids
            << "; data: " << config.data_dir << ")" << std::endl;

  server.run();
  platform.stop();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qruntime: quantum job runtime service and client"};
  app.require_subcommand(1);
  ClientOptions opts;

  auto add_client_flags = [&opts](CLI::App* cmd) {
    cmd->add_option("--endpoint", opts.endpoint, "Service URL (QRUNTIME_ENDPOINT)");
    cmd->add_option("--token", opts.token, "Bearer token (QRUNTIME_TOKEN)");
    cmd->add_flag("--json", opts.json_out, "Print the raw JSON response");
  };

  std::string config_path;
  int port = -1;
  auto* serve_cmd = app.add_subcommand("serve", "Run the service with the simulated fleet and local workers");
  serve_cmd->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", port, "Listen port (0 picks a free one)")->check(CLI::Range(0, 65535));

  std::string file;
  bool wait = false;
  std::string idem;
  auto* submit_cmd = app.add_subcommand("submit", "Submit a job descriptor");
  submit_cmd->add_option("--file", file, "Job descriptor JSON")->required();
  submit_cmd->add_flag("--wait", wait, "Poll until the job finishes");
  submit_cmd->add_option("--idempotency-key", idem, "Retry-safe submission key");
  add_client_flags(submit_cmd);

  std::string job_id;
  auto* status_cmd = app.add_subcommand("status", "Show a job's status, eta and progress");
  status_cmd->add_option("job_id", job_id)->required();
  add_client_flags(status_cmd);

  std::string out_path;
  auto* results_cmd = app.add_subcommand("results", "Fetch a finished job's results");
  results_cmd->add_option("job_id", job_id)->required();
  results_cmd->add_option("--out", out_path, "Write the results JSON here");
  add_client_flags(results_cmd);

  auto* cancel_cmd = app.add_subcommand("cancel", "Cancel a job");
  cancel_cmd->add_option("job_id", job_id)->required();
  add_client_flags(cancel_cmd);

  auto* jobs_cmd = app.add_subcommand("jobs", "List your jobs");
  add_client_flags(jobs_cmd);

  auto* backends_cmd = app.add_subcommand("backends", "List backends");
  add_client_flags(backends_cmd);

  std::string backend;
  bool refresh = false;
  auto* cal_cmd = app.add_subcommand("calibration", "Show a backend's calibration snapshot");
  cal_cmd->add_option("backend", backend)->required();
  cal_cmd->add_flag("--refresh", refresh, "Poll the device first");
  add_client_flags(cal_cmd);

  std::string start;
  double minutes = 60.0;
  auto* reserve_cmd = app.add_subcommand("reserve", "Reserve a backend window");
  reserve_cmd->add_option("backend", backend)->required();
  reserve_cmd->add_option("--start", start, "ISO-8601 UTC start")->required();
  reserve_cmd->add_option("--minutes", minutes, "Window length")->check(CLI::PositiveNumber);
  add_client_flags(reserve_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) return serve(config_path, port);

    Client client(opts);
    auto emit = [&](const json& body) { std::cout << body.dump(opts.json_out ? -1 : 2) << "\n"; };

    if (*submit_cmd) {
      httplib::Headers headers;
      if (!idem.empty()) headers.emplace("Idempotency-Key", idem);
      const json created = client.request("POST", "/v1/jobs", read_json_file(file), headers);
      const std::string id = created["job_id"];
      if (!wait) {
        if (opts.json_out) {
          emit(created);
        } else {
          std::cout << id << "\n";
        }
        return 0;
      }
      json st;
      for (;;) {
        st = client.request("GET", "/v1/jobs/" + id);
        if (terminal(st["status"].get<std::string>())) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
      }
      if (opts.json_out) {
        emit(st);
      } else {
        print_status(st);
      }
      return st["status"] == "COMPLETED" ? 0 : 2;
    }
    if (*status_cmd) {
      const auto st = client.request("GET", "/v1/jobs/" + job_id);
      if (opts.json_out) {
        emit(st);
      } else {
        print_status(st);
      }
      return 0;
    }
    if (*results_cmd) {
      const auto res = client.request("GET", "/v1/jobs/" + job_id + "/results");
      if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!(out << res.dump(2) << "\n")) throw qrt::Error(qrt::codes::kInvalidArgument, "cannot write " + out_path);
        return 0;
      }
      emit(res);
      return 0;
    }
    if (*cancel_cmd) {
      const auto st = client.request("DELETE", "/v1/jobs/" + job_id);
      if (opts.json_out) {
        emit(st);
      } else {
        print_status(st);
      }
      return 0;
    }
    if (*jobs_cmd) {
      const auto list = client.request("GET", "/v1/jobs");
      if (opts.json_out) {
        emit(list);
      } else {
        for (const auto& st : list["jobs"]) {
          std::cout << st["job_id"].get<std::string>() << "  " << st["status"].get<std::string>() << "  "
                    << st["backend_id"].get<std::string>() << "  " << st["submitted"].get<std::string>() << "\n";
        }
      }
      return 0;
    }
    if (*backends_cmd) {
      const auto list = client.request("GET", "/v1/backends");
      if (opts.json_out) {
        emit(list);
      } else {
        for (const auto& b : list["backends"]) {
          std::cout << b["backend_id"].get<std::string>() << "  " << b["num_qubits"] << " qubits  queued "
                    << b["queued_jobs"] << "  calibrated " << b["calibration_timestamp"].get<std::string>() << "\n";
        }
      }
      return 0;
    }
    if (*cal_cmd) {
      emit(client.request("GET", "/v1/backends/" + backend + "/calibration" + (refresh ? "?refresh=true" : "")));
      return 0;
    }
    if (*reserve_cmd) {
      const auto r = client.request("POST", "/v1/reservations",
                                    {{"backend_id", backend}, {"start", start}, {"duration_minutes", minutes}});
      if (opts.json_out) {
        emit(r);
      } else {
        std::cout << r["reservation_id"].get<std::string>() << "  " << r["backend_id"].get<std::string>() << "  "
                  << r["start"].get<std::string>() << " .. " << r["end"].get<std::string>() << "\n";
      }
      return 0;
    }
  } catch (const qrt::Error& e) {
    std::cerr << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "INTERNAL: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
