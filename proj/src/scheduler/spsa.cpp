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

#include "qrt/scheduler/spsa.hpp"

#include <cmath>
#include <sstream>

#include "qrt/core/error.hpp"
#include "qrt/core/random.hpp"

namespace qrt {

namespace {

Rng load_rng(const std::string& text) {
  Rng rng;
  std::istringstream in(text);
  in >> rng;
  if (!in) throw Error(codes::kInvalidArgument, "unreadable optimizer generator state");
  return rng;
}

std::string save_rng(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

void consider(SpsaState& s, const std::vector<double>& point, double value) {
  if (!s.has_best || value < s.best_value) {
    s.best_value = value;
    s.best_params = point;
    s.has_best = true;
  }
}

}  // namespace

nlohmann::json to_json(const SpsaState& s) {
  return {{"iteration", s.iteration},
          {"names", s.names},
          {"params", s.params},
          {"best_params", s.best_params},
          {"best_value", s.has_best ? nlohmann::json(s.best_value) : nlohmann::json(nullptr)},
          {"evaluations", s.evaluations},
          {"rng_state", s.rng_state},
          {"trace", s.trace}};
}

SpsaState spsa_from_json(const nlohmann::json& j) {
  SpsaState s;
  s.iteration = j.at("iteration").get<int>();
  s.names = j.at("names").get<std::vector<std::string>>();
  s.params = j.at("params").get<std::vector<double>>();
  s.best_params = j.at("best_params").get<std::vector<double>>();
  s.has_best = !j.at("best_value").is_null();
  if (s.has_best) s.best_value = j.at("best_value").get<double>();
  s.evaluations = j.at("evaluations").get<std::int64_t>();
  s.rng_state = j.at("rng_state").get<std::string>();
  s.trace = j.at("trace");
  return s;
}

SpsaState spsa_start(const HybridConfig& config, std::uint64_t seed) {
  SpsaState s;
  for (const auto& [name, value] : config.initial_params) {
    s.names.push_back(name);
    s.params.push_back(value);
  }
  s.rng_state = save_rng(Rng(derive_seed({seed, 0x5350'5341ULL})));
  return s;
}

double spsa_step_size(const SpsaConfig& config, int k) { return config.a / std::pow(k + 1.0, 0.602); }

double spsa_perturbation(const SpsaConfig& config, int k) { return config.c / std::pow(k + 1.0, 0.101); }

ParamBinding to_binding(const std::vector<std::string>& names, const std::vector<double>& values) {
  ParamBinding b;
  for (std::size_t i = 0; i < names.size(); ++i) b[names[i]] = values[i];
  return b;
}

void spsa_iterate(SpsaState& s, const SpsaConfig& config, const Objective& objective) {
  const int k = s.iteration;
  const double ak = spsa_step_size(config, k);
  const double ck = spsa_perturbation(config, k);
  Rng rng = load_rng(s.rng_state);
  std::vector<double> delta(s.params.size());
  for (auto& d : delta) d = (rng() >> 63) != 0 ? 1.0 : -1.0;

  std::vector<double> plus = s.params;
  std::vector<double> minus = s.params;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    plus[i] += ck * delta[i];
    minus[i] -= ck * delta[i];
  }
  const double y_plus = objective(to_binding(s.names, plus), s.evaluations);
  const double y_minus = objective(to_binding(s.names, minus), s.evaluations + 1);

  const double scale = (y_plus - y_minus) / (2.0 * ck);
  for (std::size_t i = 0; i < delta.size(); ++i) s.params[i] -= ak * scale * delta[i];
  s.evaluations += 2;
  consider(s, plus, y_plus);
  consider(s, minus, y_minus);
  s.trace.push_back({{"iteration", k}, {"value_plus", y_plus}, {"value_minus", y_minus}, {"params", s.params}});
  s.rng_state = save_rng(rng);
  ++s.iteration;
}

void spsa_evaluate_initial(SpsaState& s, const Objective& objective) {
  const double y = objective(to_binding(s.names, s.params), s.evaluations);
  ++s.evaluations;
  consider(s, s.params, y);
  s.trace.push_back({{"iteration", 0}, {"value", y}, {"params", s.params}});
}

}  // namespace qrt
