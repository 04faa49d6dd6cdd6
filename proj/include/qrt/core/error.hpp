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

#include <stdexcept>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

namespace qrt {

/// Stable error codes. These strings appear verbatim on the wire and in CLI
/// output, so they never change once published.
namespace codes {
inline constexpr const char* kSyntaxError = "SYNTAX_ERROR";
inline constexpr const char* kSemanticError = "SEMANTIC_ERROR";
inline constexpr const char* kUnboundSymbol = "UNBOUND_SYMBOL";
inline constexpr const char* kUnsupportedGate = "UNSUPPORTED_GATE";
inline constexpr const char* kDisconnectedQubits = "DISCONNECTED_QUBITS";
inline constexpr const char* kTooManyQubits = "TOO_MANY_QUBITS";
inline constexpr const char* kStaleCalibration = "STALE_CALIBRATION";
inline constexpr const char* kRecompileRequired = "RECOMPILE_REQUIRED";
inline constexpr const char* kInvalidShots = "INVALID_SHOTS";
inline constexpr const char* kNoData = "NO_DATA";
inline constexpr const char* kAdapterUnavailable = "ADAPTER_UNAVAILABLE";
inline constexpr const char* kTooLarge = "TOO_LARGE";
inline constexpr const char* kUnknownHandle = "UNKNOWN_HANDLE";
inline constexpr const char* kNotReady = "NOT_READY";
inline constexpr const char* kExecutionFailed = "EXECUTION_FAILED";
inline constexpr const char* kUnknownStage = "UNKNOWN_STAGE";
inline constexpr const char* kDegenerateInput = "DEGENERATE_INPUT";
inline constexpr const char* kSingularConfusion = "SINGULAR_CONFUSION";
inline constexpr const char* kStageError = "STAGE_ERROR";
inline constexpr const char* kCapabilityMissing = "CAPABILITY_MISSING";
inline constexpr const char* kUserLimitExceeded = "USER_LIMIT_EXCEEDED";
inline constexpr const char* kUnknownBackend = "UNKNOWN_BACKEND";
inline constexpr const char* kUnknownJob = "UNKNOWN_JOB";
inline constexpr const char* kUnknownSession = "UNKNOWN_SESSION";
inline constexpr const char* kUnknownWorker = "UNKNOWN_WORKER";
inline constexpr const char* kConflict = "CONFLICT";
inline constexpr const char* kNoCapableBackend = "NO_CAPABLE_BACKEND";
inline constexpr const char* kIllegalTransition = "ILLEGAL_TRANSITION";
inline constexpr const char* kInvalidArgument = "INVALID_ARGUMENT";
inline constexpr const char* kSchemaViolation = "SCHEMA_VIOLATION";
inline constexpr const char* kStorageFailure = "STORAGE_FAILURE";
inline constexpr const char* kCorruptLog = "CORRUPT_LOG";
inline constexpr const char* kAuthFailed = "AUTH_FAILED";
inline constexpr const char* kForbidden = "FORBIDDEN";
inline constexpr const char* kNotFound = "NOT_FOUND";
inline constexpr const char* kJobFailed = "JOB_FAILED";
inline constexpr const char* kJobCancelled = "JOB_CANCELLED";
inline constexpr const char* kWorkerLost = "WORKER_LOST";
inline constexpr const char* kInternal = "INTERNAL";
}  // namespace codes

/// Base exception for every recoverable failure in the runtime. Carries a
/// stable code string and an optional structured details object.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message,
        nlohmann::json details = nlohmann::json::object())
      : std::runtime_error(message),
        code_(std::move(code)),
        details_(std::move(details)) {}

  [[nodiscard]] const std::string& code() const noexcept { return code_; }
  [[nodiscard]] const nlohmann::json& details() const noexcept { return details_; }

 private:
  std::string code_;
  nlohmann::json details_;
};

}  // namespace qrt
