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
#include <set>

#include <Eigen/Dense>

#include "qrt/pipeline/pipeline.hpp"

namespace qrt {

namespace {

// Weights w with intercept = Σ w_i y_i for the least-squares line through
// (x_i, y_i).
Eigen::VectorXd intercept_weights(const std::vector<double>& xs) {
  std::set<double> distinct(xs.begin(), xs.end());
  if (distinct.size() < 2) {
    throw Error(codes::kDegenerateInput, "extrapolation needs at least two distinct scale factors");
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(xs.size()), 2);
  for (std::size_t i = 0; i < xs.size(); ++i) a.row(static_cast<Eigen::Index>(i)) << 1.0, xs[i];
  const Eigen::MatrixXd pinv = (a.transpose() * a).ldlt().solve(a.transpose());
  return pinv.row(0).transpose();
}

}  // namespace

Circuit zne_fold(const Circuit& circuit, int scale) {
  if (scale < 1 || scale % 2 == 0) {
    throw Error(codes::kInvalidArgument, "fold scale must be an odd integer >= 1", {{"scale", scale}});
  }
  Circuit out(circuit.num_qubits(), circuit.num_clbits());
  for (const auto& s : circuit.symbols()) out.declare_symbol(s);
  const int pairs = (scale - 1) / 2;
  for (const auto& inst : circuit.instructions()) {
    out.push(inst);
    if (!is_unitary(inst.gate)) continue;
    const Instruction adj = inverse(inst);
    for (int k = 0; k < pairs; ++k) {
      out.push(adj);
      out.push(inst);
    }
  }
  return out;
}

double richardson_extrapolate(const std::vector<std::pair<double, double>>& points) {
  std::vector<double> xs;
  Eigen::VectorXd ys(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    xs.push_back(points[i].first);
    ys(static_cast<Eigen::Index>(i)) = points[i].second;
  }
  return intercept_weights(xs).dot(ys);
}

ZneStage::ZneStage(const nlohmann::json& config) {
  if (config.contains("scales")) {
    const auto& s = config.at("scales");
    if (!s.is_array()) throw Error(codes::kInvalidArgument, "zne scales must be an array");
    scales_.clear();
    for (const auto& v : s) {
      if (!v.is_number_integer() || v.get<int>() < 1 || v.get<int>() % 2 == 0) {
        throw Error(codes::kInvalidArgument, "zne scales must be odd integers >= 1", {{"scales", s}});
      }
      scales_.push_back(v.get<int>());
    }
  }
  if (std::set<int>(scales_.begin(), scales_.end()).size() < 2) {
    throw Error(codes::kDegenerateInput, "zne needs at least two distinct scales");
  }
}

std::vector<Variant> ZneStage::pre(const Variant& input) {
  std::vector<Variant> out;
  for (int s : scales_) {
    Variant v = input;
    v.circuit = zne_fold(input.circuit, s);
    v.tag["zne_scale"] = s;
    out.push_back(std::move(v));
  }
  return out;
}

StageResult ZneStage::post(const Variant&, std::vector<StageResult> results) {
  std::vector<double> xs(scales_.begin(), scales_.end());
  const auto w = intercept_weights(xs);
  StageResult r;
  nlohmann::json raw = nlohmann::json::array();
  double value = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const double wi = w(static_cast<Eigen::Index>(i));
    value += wi * results[i].value;
    r.variance += wi * wi * results[i].variance;
    raw.push_back(results[i].value);
    if (scales_[i] == 1 && !r.counts) {
      r.counts = results[i].counts;
      r.metadata["raw_value"] = results[i].value;
    }
  }
  r.value = std::clamp(value, -1.0, 1.0);
  r.metadata["scale_factors"] = scales_;
  r.metadata["raw_values"] = raw;
  r.metadata["extrapolated"] = value;
  if (!r.counts) r.counts = results.front().counts;
  return r;
}

}  // namespace qrt
