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
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace qrt::wire {

/// Schema files from schemas/, compiled in: name (file stem) -> text.
[[nodiscard]] const std::map<std::string, std::string>& embedded_schemas();

/// Parsed schema by name. Throws INTERNAL for unknown names.
[[nodiscard]] const nlohmann::json& schema(const std::string& name);

struct SchemaIssue {
  /// JSON pointer to the offending value ("" for the root).
  std::string path;
  std::string reason;
};

/// Checks `value` against the keyword subset the published schemas use:
/// type, const, enum, properties, required, additionalProperties, items,
/// minItems, maxItems, minLength, pattern, minimum, maximum,
/// exclusiveMinimum, anyOf, oneOf, local $ref and format "date-time".
/// Returns the first problem found.
[[nodiscard]] std::optional<SchemaIssue> first_violation(const nlohmann::json& schema, const nlohmann::json& value);

/// Throws SCHEMA_VIOLATION with details {schema, field, reason}.
void validate(const std::string& schema_name, const nlohmann::json& value);

}  // namespace qrt::wire
