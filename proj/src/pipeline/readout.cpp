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

#include <algorithm>
#include <bit>
#include <cmath>

#include <Eigen/Dense>

#include "qrt/pipeline/pipeline.hpp"

namespace qrt {

double mitigated_expectation(const std::map<std::string, double>& probabilities,
                             const std::vector<ReadoutConfusion>& confusion, const std::string& observable,
                             double min_determinant) {
  if (probabilities.empty()) throw Error(codes::kInvalidArgument, "no probabilities to correct");
  const int width = static_cast<int>(probabilities.begin()->first.size());
  const auto bits = observable_bits(observable, width);
  if (bits.size() > 24) throw Error(codes::kTooLarge, "readout correction limited to 24 bits");

  // Marginal over the selected bits; position m of the index is bits[m].
  Eigen::VectorXd p = Eigen::VectorXd::Zero(Eigen::Index(1) << bits.size());
  for (const auto& [key, prob] : probabilities) {
    Eigen::Index idx = 0;
    for (std::size_t m = 0; m < bits.size(); ++m) {
      if (key[key.size() - 1 - static_cast<std::size_t>(bits[m])] == '1') idx |= Eigen::Index(1) << m;
    }
    p(idx) += prob;
  }

  for (std::size_t m = 0; m < bits.size(); ++m) {
    const auto c = static_cast<std::size_t>(bits[m]);
    const ReadoutConfusion f = c < confusion.size() ? confusion[c] : ReadoutConfusion{};
    const double det = 1.0 - f.p1_given_0 - f.p0_given_1;
    if (det <= min_determinant) {
      throw Error(codes::kSingularConfusion, "readout confusion for clbit " + std::to_string(c) + " is singular",
                  {{"clbit", c}, {"determinant", det}});
    }
    Eigen::Matrix2d inv;
    inv << 1.0 - f.p0_given_1, -f.p0_given_1, -f.p1_given_0, 1.0 - f.p1_given_0;
    inv /= det;
    const Eigen::Index stride = Eigen::Index(1) << m;
    for (Eigen::Index base = 0; base < p.size(); ++base) {
      if (base & stride) continue;
      const double a0 = p(base), a1 = p(base | stride);
      p(base) = inv(0, 0) * a0 + inv(0, 1) * a1;
      p(base | stride) = inv(1, 0) * a0 + inv(1, 1) * a1;
    }
  }

  double value = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    value += (std::popcount(static_cast<std::uint64_t>(i)) % 2 ? -1.0 : 1.0) * p(i);
  }
  return std::clamp(value, -1.0, 1.0);
}

ReadoutMitigationStage::ReadoutMitigationStage(const nlohmann::json& config) {
  if (config.contains("readout_errors")) {
    const auto& e = config.at("readout_errors");
    if (!e.is_array()) throw Error(codes::kInvalidArgument, "readout_errors must be an array");
    std::vector<double> errors;
    for (const auto& v : e) {
      if (!v.is_number() || v.get<double>() < 0.0 || v.get<double>() > 1.0) {
        throw Error(codes::kInvalidArgument, "readout_errors must be probabilities");
      }
      errors.push_back(v.get<double>());
    }
    known_errors_ = std::move(errors);
  }
}

std::vector<Variant> ReadoutMitigationStage::pre(const Variant& input) {
  std::vector<Variant> out{input};
  if (known_errors_) return out;
  // Preparation runs: every measured qubit in |0>, then in |1>.
  for (int prepared : {0, 1}) {
    Variant v = input;
    Circuit cal(input.circuit.num_qubits(), input.circuit.num_clbits());
    std::set<int> flipped;
    for (const auto& [q, c] : input.circuit.measurements()) {
      if (prepared == 1 && flipped.insert(q).second) cal.add(Gate::X, {q});
    }
    for (const auto& [q, c] : input.circuit.measurements()) cal.measure(q, c);
    v.circuit = std::move(cal);
    v.tag["readout_calibration"] = prepared;
    out.push_back(std::move(v));
  }
  return out;
}

StageResult ReadoutMitigationStage::post(const Variant& input, std::vector<StageResult> results) {
  const auto& main = results.front();
  if (!main.counts) {
    throw Error(codes::kStageError, "readout mitigation needs counts from the inner stage");
  }
  const int nc = input.circuit.num_clbits();
  std::vector<ReadoutConfusion> confusion(static_cast<std::size_t>(nc));
  double min_det = 1e-12;
  if (known_errors_) {
    for (int c = 0; c < nc && c < static_cast<int>(known_errors_->size()); ++c) {
      confusion[c] = {(*known_errors_)[c], (*known_errors_)[c]};
    }
  } else {
    auto rate = [](const Counts& counts, int clbit, char wrong) {
      std::int64_t n = 0;
      for (const auto& [key, k] : counts.histogram) {
        if (key[key.size() - 1 - static_cast<std::size_t>(clbit)] == wrong) n += k;
      }
      return static_cast<double>(n) / static_cast<double>(counts.shots);
    };
    const Counts& zeros = *results.at(1).counts;
    const Counts& ones = *results.at(2).counts;
    for (int c = 0; c < nc; ++c) confusion[c] = {rate(zeros, c, '1'), rate(ones, c, '0')};
    // Singular below five standard errors.
    min_det = 5.0 / std::sqrt(static_cast<double>(zeros.shots));
  }
  std::map<std::string, double> probs;
  for (const auto& [key, k] : main.counts->histogram) {
    probs[key] = static_cast<double>(k) / static_cast<double>(main.counts->shots);
  }
  StageResult r;
  r.value = mitigated_expectation(probs, confusion, input.observable, min_det);
  double gain = 1.0;
  nlohmann::json conf = nlohmann::json::array();
  for (int b : observable_bits(input.observable, nc)) {
    gain *= 1.0 - confusion[b].p1_given_0 - confusion[b].p0_given_1;
  }
  for (const auto& f : confusion) conf.push_back({f.p1_given_0, f.p0_given_1});
  r.variance = main.variance / (gain * gain);
  r.counts = main.counts;
  r.metadata = main.metadata;
  r.metadata["raw_value"] = main.value;
  r.metadata["readout_confusion"] = conf;
  return r;
}

}  // namespace qrt
