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

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qrt/core/time.hpp"
#include "qrt/scheduler/policy.hpp"
#include "qrt/transpiler/transpiler.hpp"

namespace qrt {

struct DeviceSpec {
  std::string backend_id;
  /// "line" or "ring".
  std::string topology = "line";
  int num_qubits = 5;
};

struct PlatformConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "qruntime-data";
  std::string token_file = "tokens.txt";
  std::string log_level = "info";

  std::vector<DeviceSpec> fleet{{"sim-linear-5", "line", 5}, {"sim-ring-7", "ring", 7}};
  bool noiseless = false;
  bool drift = true;
  std::uint64_t fleet_seed = 7;
  double dilation_us_per_ns_shot = 0.001;

  Duration poll_interval = std::chrono::seconds(60);
  Duration staleness_limit = kDefaultStalenessLimit;

  SchedulerPolicy policy;
  /// Running jobs yield at a checkpoint after this long; zero never yields.
  Duration job_slice{};
  int local_workers = 2;
  std::chrono::milliseconds tick{20};

  bool fsync = true;
  std::int64_t snapshot_every = 1000;
};

/// Flat view of a TOML-style file: "[section]" headers prefix the keys that
/// follow ("section.key"); values are bare words, numbers, booleans or
/// double-quoted strings; '#' starts a comment. Throws INVALID_ARGUMENT with
/// the line number on malformed input.
[[nodiscard]] std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Every key config_from_values understands.
[[nodiscard]] const std::vector<std::string>& config_keys();

/// Environment variable for a key: "scheduler.user_limit" is
/// QRUNTIME_SCHEDULER_USER_LIMIT.
[[nodiscard]] std::string env_name(const std::string& key);

/// Overlays the QRUNTIME_* variables that are set.
void apply_env_overrides(std::map<std::string, std::string>& values);

/// Throws INVALID_ARGUMENT for unknown keys or unparsable values.
[[nodiscard]] PlatformConfig config_from_values(const std::map<std::string, std::string>& values);

/// File (optional: empty path means defaults) plus environment. Relative
/// data_dir and token_file resolve against the file's directory.
[[nodiscard]] PlatformConfig load_config(const std::string& path);

}  // namespace qrt
