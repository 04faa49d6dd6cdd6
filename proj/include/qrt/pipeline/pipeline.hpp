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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrt/backend/sampler.hpp"
#include "qrt/circuit/circuit.hpp"

namespace qrt {

/// A stage name from execution_options plus its options object.
struct StageSpec {
  std::string name;
  nlohmann::json config = nlohmann::json::object();

  bool operator==(const StageSpec&) const = default;
};

/// Runs one fully bound circuit and returns its counts.
using Executor = std::function<Counts(const Circuit& circuit, std::int64_t shots)>;

/// Tensor-Z parity observable. The string reads like a Counts key: character
/// i from the right is clbit i, 'Z' includes the bit and 'I' skips it.
/// Empty means every clbit.
[[nodiscard]] std::vector<int> observable_bits(const std::string& observable, int num_clbits);

/// Σ (-1)^parity(selected bits) · count / shots.
[[nodiscard]] double expectation_z(const Counts& counts, const std::string& observable = "");

/// One circuit on its way through the chain. `tag` is free for stages.
struct Variant {
  Circuit circuit;
  std::int64_t shots = 0;
  std::string observable;
  nlohmann::json tag = nlohmann::json::object();
};

struct StageResult {
  double value = 0.0;
  double variance = 0.0;
  nlohmann::json metadata = nlohmann::json::object();
  /// Counts of the primary (unmodified) variant, when one exists.
  std::optional<Counts> counts;
};

[[nodiscard]] nlohmann::json to_json(const StageResult& r);

class ExecutionBackend {
 public:
  virtual ~ExecutionBackend() = default;
  virtual StageResult run(const Variant& variant) = 0;
};

/// Bare execution: runs the executor and evaluates the observable.
class BaseExecutionBackend final : public ExecutionBackend {
 public:
  explicit BaseExecutionBackend(Executor executor) : executor_(std::move(executor)) {}
  StageResult run(const Variant& variant) override;

 private:
  Executor executor_;
};

/// Decorator around an inner backend: `pre` expands one variant into the
/// variants the inner backend runs, `post` folds their results back.
class EnrichedExecutionBackend : public ExecutionBackend {
 public:
  [[nodiscard]] virtual std::string name() const = 0;
  void wrap(ExecutionBackend* inner) { inner_ = inner; }
  StageResult run(const Variant& variant) final;

 protected:
  virtual std::vector<Variant> pre(const Variant& input) = 0;
  virtual StageResult post(const Variant& input, std::vector<StageResult> results) = 0;

 private:
  ExecutionBackend* inner_ = nullptr;
};

using StagePtr = std::unique_ptr<EnrichedExecutionBackend>;

class StageRegistry {
 public:
  using Factory = std::function<StagePtr(const nlohmann::json& config)>;

  void add(const std::string& name, Factory factory);
  [[nodiscard]] bool contains(const std::string& name) const;
  [[nodiscard]] std::set<std::string> names() const;
  /// Throws UNKNOWN_STAGE.
  [[nodiscard]] StagePtr create(const StageSpec& spec) const;

  /// ZNE under "ErrorMitigatedExecutionBackend" and "zne"; readout
  /// mitigation under "ReadoutMitigatedExecutionBackend" and
  /// "readout_mitigation".
  static StageRegistry with_builtin_stages();

 private:
  std::map<std::string, Factory> factories_;
};

/// Stages in execution_options order; the first one is the outermost.
class StageChain {
 public:
  /// Throws UNKNOWN_STAGE naming the first unregistered stage.
  static StageChain resolve(const std::vector<StageSpec>& specs, const StageRegistry& registry);

  [[nodiscard]] std::size_t size() const { return stages_.size(); }
  [[nodiscard]] std::vector<std::string> names() const;

  /// Not re-entrant: a chain belongs to one job.
  StageResult run(const Circuit& circuit, std::int64_t shots, const std::string& observable,
                  const Executor& executor);

 private:
  std::vector<StagePtr> stages_;
};

// Zero-noise extrapolation.

/// Global folding: every unitary G becomes G (G† G)^((scale-1)/2).
/// Throws INVALID_ARGUMENT unless scale is odd and >= 1.
[[nodiscard]] Circuit zne_fold(const Circuit& circuit, int scale);

/// Least-squares line through (scale, value), evaluated at 0. Throws
/// DEGENERATE_INPUT with fewer than two distinct scales.
[[nodiscard]] double richardson_extrapolate(const std::vector<std::pair<double, double>>& points);

class ZneStage final : public EnrichedExecutionBackend {
 public:
  /// config: {"scales": [1, 3, 5]}
  explicit ZneStage(const nlohmann::json& config = nlohmann::json::object());
  [[nodiscard]] std::string name() const override { return "ErrorMitigatedExecutionBackend"; }
  [[nodiscard]] const std::vector<int>& scales() const { return scales_; }

 protected:
  std::vector<Variant> pre(const Variant& input) override;
  StageResult post(const Variant& input, std::vector<StageResult> results) override;

 private:
  std::vector<int> scales_{1, 3, 5};
};

// Readout mitigation.

/// P(read 1 | prepared 0) and P(read 0 | prepared 1) for one clbit.
struct ReadoutConfusion {
  double p1_given_0 = 0.0;
  double p0_given_1 = 0.0;
};

/// Applies the inverse of the tensored per-clbit confusion to the measured
/// distribution and returns the corrected parity expectation, clipped to
/// [-1, 1]. `confusion[c]` is used for clbit c. Throws SINGULAR_CONFUSION when
/// a selected clbit's matrix has determinant <= min_determinant.
[[nodiscard]] double mitigated_expectation(const std::map<std::string, double>& probabilities,
                                           const std::vector<ReadoutConfusion>& confusion,
                                           const std::string& observable, double min_determinant = 1e-12);

class ReadoutMitigationStage final : public EnrichedExecutionBackend {
 public:
  /// config: {} to calibrate with all-0 / all-1 preparation runs, or
  /// {"readout_errors": [e0, e1, ...]} for known symmetric flip probabilities.
  explicit ReadoutMitigationStage(const nlohmann::json& config = nlohmann::json::object());
  [[nodiscard]] std::string name() const override { return "ReadoutMitigatedExecutionBackend"; }

 protected:
  std::vector<Variant> pre(const Variant& input) override;
  StageResult post(const Variant& input, std::vector<StageResult> results) override;

 private:
  std::optional<std::vector<double>> known_errors_;
};

}  // namespace qrt
