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

#include "qrt/pipeline/pipeline.hpp"

#include <algorithm>
#include <bit>

namespace qrt {

std::vector<int> observable_bits(const std::string& observable, int num_clbits) {
  std::vector<int> bits;
  if (observable.empty()) {
    for (int c = 0; c < num_clbits; ++c) bits.push_back(c);
    return bits;
  }
  if (static_cast<int>(observable.size()) > num_clbits) {
    throw Error(codes::kInvalidArgument, "observable '" + observable + "' is longer than the " +
                                             std::to_string(num_clbits) + " measured bits");
  }
  for (std::size_t i = 0; i < observable.size(); ++i) {
    const char ch = observable[observable.size() - 1 - i];
    if (ch == 'Z' || ch == 'z') {
      bits.push_back(static_cast<int>(i));
    } else if (ch != 'I' && ch != 'i') {
      throw Error(codes::kInvalidArgument, "observable may only contain Z and I", {{"observable", observable}});
    }
  }
  return bits;
}

double expectation_z(const Counts& counts, const std::string& observable) {
  if (counts.shots <= 0 || counts.histogram.empty()) {
    throw Error(codes::kInvalidArgument, "expectation of empty counts");
  }
  const int width = static_cast<int>(counts.histogram.begin()->first.size());
  const auto bits = observable_bits(observable, width);
  double total = 0.0;
  for (const auto& [key, n] : counts.histogram) {
    int parity = 0;
    for (int b : bits) parity ^= key[key.size() - 1 - static_cast<std::size_t>(b)] == '1';
    total += (parity ? -1.0 : 1.0) * static_cast<double>(n);
  }
  return total / static_cast<double>(counts.shots);
}

nlohmann::json to_json(const StageResult& r) {
  nlohmann::json j{{"value", r.value}, {"variance", r.variance}, {"metadata", r.metadata}};
  if (r.counts) j["counts"] = to_json(*r.counts);
  return j;
}

StageResult BaseExecutionBackend::run(const Variant& variant) {
  StageResult r;
  r.counts = executor_(variant.circuit, variant.shots);
  r.value = expectation_z(*r.counts, variant.observable);
  r.variance = (1.0 - r.value * r.value) / static_cast<double>(variant.shots);
  return r;
}

StageResult EnrichedExecutionBackend::run(const Variant& variant) {
  if (inner_ == nullptr) throw Error(codes::kInternal, name() + " is not wrapped around a backend");
  auto variants = pre(variant);
  std::vector<StageResult> results;
  results.reserve(variants.size());
  for (const auto& v : variants) results.push_back(inner_->run(v));
  return post(variant, std::move(results));
}

void StageRegistry::add(const std::string& name, Factory factory) { factories_[name] = std::move(factory); }

bool StageRegistry::contains(const std::string& name) const { return factories_.contains(name); }

std::set<std::string> StageRegistry::names() const {
  std::set<std::string> out;
  for (const auto& [name, f] : factories_) out.insert(name);
  return out;
}

StagePtr StageRegistry::create(const StageSpec& spec) const {
  auto it = factories_.find(spec.name);
  if (it == factories_.end()) {
    throw Error(codes::kUnknownStage, "unknown stage '" + spec.name + "'", {{"stage", spec.name}});
  }
  return it->second(spec.config.is_null() ? nlohmann::json::object() : spec.config);
}

StageRegistry StageRegistry::with_builtin_stages() {
  StageRegistry r;
  auto zne = [](const nlohmann::json& c) -> StagePtr { return std::make_unique<ZneStage>(c); };
  auto readout = [](const nlohmann::json& c) -> StagePtr { return std::make_unique<ReadoutMitigationStage>(c); };
  r.add("ErrorMitigatedExecutionBackend", zne);
  r.add("zne", zne);
  r.add("ReadoutMitigatedExecutionBackend", readout);
  r.add("readout_mitigation", readout);
  return r;
}

StageChain StageChain::resolve(const std::vector<StageSpec>& specs, const StageRegistry& registry) {
  StageChain chain;
  for (const auto& spec : specs) chain.stages_.push_back(registry.create(spec));
  return chain;
}

std::vector<std::string> StageChain::names() const {
  std::vector<std::string> out;
  for (const auto& s : stages_) out.push_back(s->name());
  return out;
}

StageResult StageChain::run(const Circuit& circuit, std::int64_t shots, const std::string& observable,
                            const Executor& executor) {
  if (shots < 1) throw Error(codes::kInvalidShots, "shots must be >= 1");
  BaseExecutionBackend base(executor);
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    stages_[i]->wrap(i + 1 < stages_.size() ? static_cast<ExecutionBackend*>(stages_[i + 1].get()) : &base);
  }
  ExecutionBackend* outer = stages_.empty() ? static_cast<ExecutionBackend*>(&base) : stages_.front().get();
  return outer->run(Variant{circuit, shots, observable, nlohmann::json::object()});
}

}  // namespace qrt
