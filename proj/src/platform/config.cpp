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

#include "qrt/platform/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qrt/core/error.hpp"

namespace qrt {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_line(int line, const std::string& what) {
  throw Error(codes::kInvalidArgument, "config line " + std::to_string(line) + ": " + what, {{"line", line}});
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& v, int line) {
  if (v.empty() || v.front() != '"') return v;
  if (v.size() < 2 || v.back() != '"') bad_line(line, "unterminated string");
  std::string out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] == '\\' && i + 2 < v.size()) {
      ++i;
      out.push_back(v[i] == 'n' ? '\n' : v[i] == 't' ? '\t' : v[i]);
    } else {
      out.push_back(v[i]);
    }
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw Error(codes::kInvalidArgument, "config " + key + " = '" + value + "': expected " + expected,
              {{"key", key}, {"value", value}});
}

std::int64_t as_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) bad_value(key, v, "an integer");
  return out;
}

double as_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  bad_value(key, v, "a number");
}

bool as_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "true or false");
}

Duration seconds_value(const std::string& key, const std::string& v) {
  const double s = as_double(key, v);
  if (s < 0) bad_value(key, v, "a non-negative number of seconds");
  return from_seconds(s);
}

// "id:topology:qubits" entries separated by commas.
std::vector<DeviceSpec> parse_fleet(const std::string& key, const std::string& v) {
  std::vector<DeviceSpec> out;
  std::stringstream ss(v);
  std::string entry;
  while (std::getline(ss, entry, ',')) {
    entry = trim(entry);
    if (entry.empty()) continue;
    const auto a = entry.find(':');
    const auto b = entry.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos) bad_value(key, v, "id:line|ring:qubits entries");
    DeviceSpec d;
    d.backend_id = entry.substr(0, a);
    d.topology = entry.substr(a + 1, b - a - 1);
    d.num_qubits = static_cast<int>(as_int(key, entry.substr(b + 1)));
    if (d.backend_id.empty() || (d.topology != "line" && d.topology != "ring") || d.num_qubits < 1) {
      bad_value(key, v, "id:line|ring:qubits entries");
    }
    out.push_back(std::move(d));
  }
  if (out.empty()) bad_value(key, v, "at least one device");
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int n = 0;
  while (std::getline(in, raw)) {
    ++n;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') bad_line(n, "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) bad_line(n, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad_line(n, "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) bad_line(n, "missing key");
    out[section.empty() ? key : section + "." + key] = unquote(trim(std::string_view(line).substr(eq + 1)), n);
  }
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "host",
      "port",
      "data_dir",
      "token_file",
      "log_level",
      "fleet.devices",
      "fleet.noiseless",
      "fleet.drift",
      "fleet.seed",
      "fleet.dilation_us_per_ns_shot",
      "calibration.poll_interval_s",
      "calibration.staleness_limit_s",
      "scheduler.user_limit",
      "scheduler.heartbeat_ttl_s",
      "scheduler.max_backoff_s",
      "scheduler.job_slice_s",
      "scheduler.tick_ms",
      "workers.local",
      "store.fsync",
      "store.snapshot_every",
  };
  return keys;
}

std::string env_name(const std::string& key) {
  std::string out = "QRUNTIME_";
  for (char c : key) out.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

void apply_env_overrides(std::map<std::string, std::string>& values) {
  for (const auto& key : config_keys()) {
    if (const char* v = std::getenv(env_name(key).c_str())) values[key] = v;
  }
}

PlatformConfig config_from_values(const std::map<std::string, std::string>& values) {
  const auto& known = config_keys();
  PlatformConfig c;
  for (const auto& [key, v] : values) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(codes::kInvalidArgument, "unknown config key '" + key + "'", {{"key", key}});
    }
    if (key == "host") {
      c.host = v;
    } else if (key == "port") {
      const auto p = as_int(key, v);
      if (p < 0 || p > 65535) bad_value(key, v, "a port number");
      c.port = static_cast<int>(p);
    } else if (key == "data_dir") {
      c.data_dir = v;
    } else if (key == "token_file") {
      c.token_file = v;
    } else if (key == "log_level") {
      c.log_level = v;
    } else if (key == "fleet.devices") {
      c.fleet = parse_fleet(key, v);
    } else if (key == "fleet.noiseless") {
      c.noiseless = as_bool(key, v);
    } else if (key == "fleet.drift") {
      c.drift = as_bool(key, v);
    } else if (key == "fleet.seed") {
      c.fleet_seed = static_cast<std::uint64_t>(as_int(key, v));
    } else if (key == "fleet.dilation_us_per_ns_shot") {
      c.dilation_us_per_ns_shot = as_double(key, v);
      if (c.dilation_us_per_ns_shot < 0) bad_value(key, v, "a non-negative number");
    } else if (key == "calibration.poll_interval_s") {
      c.poll_interval = seconds_value(key, v);
    } else if (key == "calibration.staleness_limit_s") {
      c.staleness_limit = seconds_value(key, v);
    } else if (key == "scheduler.user_limit") {
      c.policy.user_limit = static_cast<int>(as_int(key, v));
      if (c.policy.user_limit < 1) bad_value(key, v, "a positive integer");
    } else if (key == "scheduler.heartbeat_ttl_s") {
      c.policy.heartbeat_ttl = seconds_value(key, v);
    } else if (key == "scheduler.max_backoff_s") {
      c.policy.max_backoff = seconds_value(key, v);
    } else if (key == "scheduler.job_slice_s") {
      c.job_slice = seconds_value(key, v);
    } else if (key == "scheduler.tick_ms") {
      c.tick = std::chrono::milliseconds(as_int(key, v));
      if (c.tick.count() < 1) bad_value(key, v, "a positive integer");
    } else if (key == "workers.local") {
      c.local_workers = static_cast<int>(as_int(key, v));
      if (c.local_workers < 0) bad_value(key, v, "a non-negative integer");
    } else if (key == "store.fsync") {
      c.fsync = as_bool(key, v);
    } else if (key == "store.snapshot_every") {
      c.snapshot_every = as_int(key, v);
    }
  }
  return c;
}

PlatformConfig load_config(const std::string& path) {
  std::map<std::string, std::string> values;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error(codes::kInvalidArgument, "cannot read config file " + path, {{"path", path}});
    std::stringstream ss;
    ss << in.rdbuf();
    values = parse_config_text(ss.str());
  }
  apply_env_overrides(values);
  auto config = config_from_values(values);
  if (!path.empty()) {
    const auto base = std::filesystem::path(path).parent_path();
    for (auto* p : {&config.data_dir, &config.token_file}) {
      if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
    }
  }
  return config;
}

}  // namespace qrt
