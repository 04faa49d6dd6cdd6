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

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "qrt/platform/platform.hpp"

namespace qrt::api {

inline constexpr const char* kVersion = "0.1.0";

/// Maps a bearer token to the user it authenticates.
class TokenVerifier {
 public:
  virtual ~TokenVerifier() = default;
  [[nodiscard]] virtual std::optional<std::string> user_for(const std::string& token) const = 0;
};

/// Fixed token table. The file holds one "token user" pair per line; blank
/// lines and '#' comments are skipped.
class StaticTokenVerifier final : public TokenVerifier {
 public:
  explicit StaticTokenVerifier(std::map<std::string, std::string> tokens) : tokens_(std::move(tokens)) {}
  /// Throws INVALID_ARGUMENT when the file is unreadable or malformed.
  static std::shared_ptr<StaticTokenVerifier> from_file(const std::string& path);

  [[nodiscard]] std::optional<std::string> user_for(const std::string& token) const override;

 private:
  std::map<std::string, std::string> tokens_;
};

/// HTTP status for an error code.
[[nodiscard]] int http_status(const std::string& code);

/// The /v1 REST surface over a Platform.
class HttpServer {
 public:
  HttpServer(Platform& platform, std::shared_ptr<const TokenVerifier> verifier);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free one. Returns the bound port. Throws
  /// INVALID_ARGUMENT when binding fails.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call after bind().
  void run();
  void stop();
  [[nodiscard]] bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace qrt::api
