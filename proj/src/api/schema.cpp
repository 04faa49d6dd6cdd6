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

#include "qrt/api/schema.hpp"

#include <mutex>
#include <regex>

#include "qrt/core/error.hpp"
#include "qrt/core/time.hpp"

namespace qrt::wire {

namespace {

using nlohmann::json;

bool has_type(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    return v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<std::int64_t>(v.get<double>()));
  }
  return false;
}

std::string escape_pointer(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

const std::regex& cached_regex(const std::string& pattern) {
  static std::mutex mu;
  static std::map<std::string, std::regex> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(pattern);
  if (it == cache.end()) it = cache.emplace(pattern, std::regex(pattern, std::regex::ECMAScript)).first;
  return it->second;
}

class Validator {
 public:
  explicit Validator(const json& root) : root_(root) {}

  std::optional<SchemaIssue> check(const json& s, const json& v, const std::string& path) const {
    if (s.is_boolean()) {
      if (!s.get<bool>()) return SchemaIssue{path, "no value is allowed here"};
      return std::nullopt;
    }
    if (auto ref = s.find("$ref"); ref != s.end()) {
      if (auto issue = check(resolve(ref->get<std::string>()), v, path)) return issue;
    }
    if (auto t = s.find("type"); t != s.end()) {
      bool ok = false;
      if (t->is_string()) {
        ok = has_type(v, t->get<std::string>());
      } else {
        for (const auto& x : *t) ok = ok || has_type(v, x.get<std::string>());
      }
      if (!ok) return SchemaIssue{path, "expected type " + t->dump()};
    }
    if (auto c = s.find("const"); c != s.end() && *c != v) return SchemaIssue{path, "must equal " + c->dump()};
    if (auto e = s.find("enum"); e != s.end()) {
      if (std::find(e->begin(), e->end(), v) == e->end()) return SchemaIssue{path, "must be one of " + e->dump()};
    }
    if (v.is_string()) {
      const auto& str = v.get_ref<const std::string&>();
      if (auto m = s.find("minLength"); m != s.end() && str.size() < m->get<std::size_t>()) {
        return SchemaIssue{path, "shorter than " + m->dump()};
      }
      if (auto p = s.find("pattern"); p != s.end() && !std::regex_search(str, cached_regex(p->get<std::string>()))) {
        return SchemaIssue{path, "does not match " + p->get<std::string>()};
      }
      if (auto f = s.find("format"); f != s.end() && *f == "date-time") {
        try {
          (void)parse_iso8601(str);
        } catch (const Error&) {
          return SchemaIssue{path, "not an ISO-8601 UTC timestamp"};
        }
      }
    }
    if (v.is_number()) {
      const double x = v.get<double>();
      if (auto m = s.find("minimum"); m != s.end() && x < m->get<double>()) {
        return SchemaIssue{path, "below minimum " + m->dump()};
      }
      if (auto m = s.find("maximum"); m != s.end() && x > m->get<double>()) {
        return SchemaIssue{path, "above maximum " + m->dump()};
      }
      if (auto m = s.find("exclusiveMinimum"); m != s.end() && x <= m->get<double>()) {
        return SchemaIssue{path, "must be greater than " + m->dump()};
      }
    }
    if (v.is_array()) {
      if (auto m = s.find("minItems"); m != s.end() && v.size() < m->get<std::size_t>()) {
        return SchemaIssue{path, "fewer than " + m->dump() + " items"};
      }
      if (auto m = s.find("maxItems"); m != s.end() && v.size() > m->get<std::size_t>()) {
        return SchemaIssue{path, "more than " + m->dump() + " items"};
      }
      if (auto items = s.find("items"); items != s.end()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (auto issue = check(*items, v[i], path + "/" + std::to_string(i))) return issue;
        }
      }
    }
    if (v.is_object()) {
      if (auto req = s.find("required"); req != s.end()) {
        for (const auto& name : *req) {
          if (!v.contains(name.get<std::string>())) {
            return SchemaIssue{path + "/" + escape_pointer(name.get<std::string>()), "is required"};
          }
        }
      }
      const auto props = s.find("properties");
      const auto extra = s.find("additionalProperties");
      for (const auto& [key, child] : v.items()) {
        const std::string child_path = path + "/" + escape_pointer(key);
        if (props != s.end() && props->contains(key)) {
          if (auto issue = check(props->at(key), child, child_path)) return issue;
        } else if (extra != s.end()) {
          if (extra->is_boolean() && !extra->get<bool>()) return SchemaIssue{child_path, "unknown field"};
          if (auto issue = check(*extra, child, child_path)) return issue;
        }
      }
    }
    if (auto any = s.find("anyOf"); any != s.end()) {
      std::optional<SchemaIssue> first;
      bool ok = false;
      for (const auto& alt : *any) {
        auto issue = check(alt, v, path);
        if (!issue) {
          ok = true;
          break;
        }
        if (!first) first = issue;
      }
      if (!ok) return SchemaIssue{path, "matches no alternative (first: " + first->path + " " + first->reason + ")"};
    }
    if (auto one = s.find("oneOf"); one != s.end()) {
      int matches = 0;
      for (const auto& alt : *one) matches += !check(alt, v, path).has_value();
      if (matches != 1) return SchemaIssue{path, "must match exactly one alternative, matched " + std::to_string(matches)};
    }
    return std::nullopt;
  }

 private:
  const json& resolve(const std::string& ref) const {
    if (ref.rfind("#", 0) != 0) throw Error(codes::kInternal, "only local schema references are supported: " + ref);
    const json* at = &root_;
    try {
      at = &root_.at(json::json_pointer(ref.substr(1)));
    } catch (const json::exception&) {
      throw Error(codes::kInternal, "dangling schema reference " + ref);
    }
    return *at;
  }

  const json& root_;
};

}  // namespace

const json& schema(const std::string& name) {
  static std::mutex mu;
  static std::map<std::string, json> parsed;
  std::lock_guard lock(mu);
  if (auto it = parsed.find(name); it != parsed.end()) return it->second;
  const auto& all = embedded_schemas();
  auto it = all.find(name);
  if (it == all.end()) throw Error(codes::kInternal, "no schema named '" + name + "'");
  return parsed.emplace(name, json::parse(it->second)).first->second;
}

std::optional<SchemaIssue> first_violation(const json& s, const json& value) { return Validator(s).check(s, value, ""); }

void validate(const std::string& schema_name, const json& value) {
  if (auto issue = first_violation(schema(schema_name), value)) {
    const std::string field = issue->path.empty() ? "" : issue->path.substr(1);
    throw Error(codes::kSchemaViolation,
                schema_name + ": " + (field.empty() ? std::string("body") : field) + " " + issue->reason,
                {{"schema", schema_name}, {"field", field}, {"reason", issue->reason}});
  }
}

}  // namespace qrt::wire
