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

#include "qrt/scheduler/job_runner.hpp"

#include <map>
#include <memory>
#include <set>

#include "qrt/circuit/qasm.hpp"
#include "qrt/core/error.hpp"
#include "qrt/core/random.hpp"
#include "qrt/scheduler/estimator.hpp"
#include "qrt/scheduler/spsa.hpp"

namespace qrt {

namespace {

using nlohmann::json;

struct Aborted {};
struct Yield {};

struct Counters {
  int template_compilations = 0;
  int recompiles = 0;
  std::int64_t bindings = 0;

  [[nodiscard]] json to_json() const {
    return {{"template_compilations", template_compilations}, {"recompiles", recompiles}, {"bindings", bindings}};
  }
  static Counters from(const json& checkpoint) {
    Counters c;
    if (!checkpoint.is_object() || !checkpoint.contains("compilation")) return c;
    const auto& j = checkpoint.at("compilation");
    c.template_compilations = j.at("template_compilations").get<int>();
    c.recompiles = j.at("recompiles").get<int>();
    c.bindings = j.at("bindings").get<std::int64_t>();
    return c;
  }
};

class Run {
 public:
  Run(const JobRecord& job, const RunContext& ctx)
      : job_(job), ctx_(ctx), caps_(ctx.adapter->capabilities()), started_(ctx.clock->now()) {
    counters_ = Counters::from(job.checkpoint);
  }

  json execute() {
    return job_.descriptor.kind == JobKind::Hybrid ? run_hybrid() : run_items();
  }

  Duration device_time() const { return device_time_; }

 private:
  CalibrationSnapshot calibration() {
    try {
      auto cal = ctx_.calibration->latest(caps_.backend_id);
      if (ctx_.clock->now() - cal.timestamp <= ctx_.staleness_limit) return cal;
    } catch (const Error& e) {
      if (e.code() != codes::kNoData) throw;
    }
    return ctx_.calibration->poll(caps_.backend_id);
  }

  CompiledTemplate compile(std::size_t item) {
    auto tpl = compile_template(parse_qasm(job_.descriptor.items[item].circuit), caps_, calibration());
    ++counters_.template_compilations;
    return tpl;
  }

  ExecutablePayload bind(CompiledTemplate& tpl, const ParamBinding& binding, const JobItem& item) {
    for (int attempt = 0;; ++attempt) {
      const auto cal = calibration();
      BindOptions opts;
      opts.shots = item.shots;
      opts.now = ctx_.clock->now();
      opts.staleness_limit = ctx_.staleness_limit;
      opts.seed = job_.seed;
      try {
        auto payload = bind_with_calibration(tpl, binding, cal, opts);
        ++counters_.bindings;
        return payload;
      } catch (const Error& e) {
        if (attempt >= 3) throw;
        if (e.code() == codes::kStaleCalibration) {
          ctx_.calibration->poll(caps_.backend_id);
        } else if (e.code() == codes::kRecompileRequired) {
          tpl = recompile(tpl, cal);
          ++counters_.recompiles;
        } else {
          throw;
        }
      }
    }
  }

  Counts execute_circuit(const ExecutablePayload& base, const Circuit& circuit, std::int64_t shots,
                         std::uint64_t seed) {
    ExecutablePayload p = base;
    p.circuit = decompose(circuit, caps_.basis_gates);
    p.shots = shots;
    p.seed = seed;
    p.estimated_duration_ns = estimate_duration_ns(p.circuit, caps_);
    const auto handle = ctx_.adapter->submit(p);
    for (;;) {
      const auto status = ctx_.adapter->wait(handle, ctx_.poll_interval);
      if (status == HandleStatus::Done || status == HandleStatus::Failed) break;
      if (ctx_.should_stop && ctx_.should_stop()) throw Aborted{};
    }
    auto counts = ctx_.adapter->results(handle);
    device_time_ += Duration{(p.estimated_duration_ns * shots + 999) / 1000} + kExecutionOverhead;
    return counts;
  }

  StageResult evaluate(CompiledTemplate& tpl, std::size_t item_index, const ParamBinding& binding,
                       std::int64_t evaluation) {
    if (ctx_.should_stop && ctx_.should_stop()) throw Aborted{};
    const JobItem& item = job_.descriptor.items[item_index];
    const auto payload = bind(tpl, binding, item);
    auto chain = StageChain::resolve(item.execution_options, *ctx_.stages);
    std::uint64_t variant = 0;
    Executor executor = [&](const Circuit& c, std::int64_t shots) {
      const auto seed = derive_seed({job_.seed, static_cast<std::uint64_t>(evaluation), variant++});
      return execute_circuit(payload, c, shots, seed);
    };
    return chain.run(payload.circuit, item.shots, item.observable, executor);
  }

  void checkpoint(const json& cp, const json& progress, bool more_to_do) {
    if (ctx_.on_checkpoint) ctx_.on_checkpoint(cp, progress);
    if (more_to_do && ctx_.slice > Duration::zero() && ctx_.clock->now() - started_ >= ctx_.slice) throw Yield{};
  }

  json run_items() {
    const auto& items = job_.descriptor.items;
    std::size_t done = 0;
    json results = json::array();
    if (job_.checkpoint.is_object() && job_.checkpoint.contains("completed_items")) {
      done = job_.checkpoint.at("completed_items").get<std::size_t>();
      results = job_.checkpoint.at("item_results");
    }
    for (std::size_t i = done; i < items.size(); ++i) {
      auto tpl = compile(i);
      results.push_back(to_json(evaluate(tpl, i, {}, static_cast<std::int64_t>(i))));
      json cp{{"completed_items", i + 1}, {"item_results", results}, {"compilation", counters_.to_json()}};
      checkpoint(cp, {{"completed_items", i + 1}, {"total", items.size()}}, i + 1 < items.size());
    }
    return {{"items", results}, {"compilation", counters_.to_json()}};
  }

  json run_hybrid() {
    const HybridConfig& config = *job_.descriptor.hybrid;
    SpsaState state = job_.checkpoint.is_object() && job_.checkpoint.contains("spsa")
                          ? spsa_from_json(job_.checkpoint.at("spsa"))
                          : spsa_start(config, job_.seed);
    auto tpl = compile(0);
    const Objective objective = [&](const ParamBinding& binding, std::int64_t evaluation) {
      return evaluate(tpl, 0, binding, evaluation).value;
    };
    auto save = [&](bool more) {
      json cp{{"spsa", to_json(state)}, {"compilation", counters_.to_json()}};
      checkpoint(cp, {{"iteration", state.iteration}, {"total", config.iterations}}, more);
    };
    if (config.iterations == 0 && state.evaluations == 0) {
      spsa_evaluate_initial(state, objective);
      save(false);
    }
    while (state.iteration < config.iterations) {
      spsa_iterate(state, config.spsa, objective);
      save(state.iteration < config.iterations);
    }
    return {{"params", to_binding(state.names, state.params)},
            {"best_params", to_binding(state.names, state.best_params)},
            {"best_value", state.best_value},
            {"iterations", state.iteration},
            {"evaluations", state.evaluations},
            {"trace", state.trace},
            {"compilation", counters_.to_json()}};
  }

  const JobRecord& job_;
  const RunContext& ctx_;
  const BackendCapabilities caps_;
  const Timestamp started_;
  Counters counters_;
  Duration device_time_{};
};

}  // namespace

bool is_permanent_error(const std::string& code) {
  static const std::set<std::string> permanent{
      codes::kSyntaxError,      codes::kSemanticError,     codes::kUnboundSymbol,   codes::kUnsupportedGate,
      codes::kDisconnectedQubits, codes::kTooManyQubits,   codes::kInvalidShots,    codes::kUnknownStage,
      codes::kDegenerateInput,  codes::kSingularConfusion, codes::kInvalidArgument, codes::kTooLarge,
  };
  return permanent.contains(code);
}

RunOutcome run_job(const JobRecord& job, const RunContext& ctx) {
  RunOutcome out;
  std::unique_ptr<Run> run;
  try {
    run = std::make_unique<Run>(job, ctx);
    out.results = run->execute();
    out.kind = RunOutcome::Kind::Completed;
  } catch (const Yield&) {
    out.kind = RunOutcome::Kind::Yielded;
  } catch (const Aborted&) {
    out.kind = RunOutcome::Kind::Aborted;
  } catch (const Error& e) {
    out.kind = RunOutcome::Kind::Failed;
    out.error_code = e.code();
    out.message = e.what();
    out.details = e.details();
    out.permanent = is_permanent_error(e.code());
  } catch (const std::exception& e) {
    out.kind = RunOutcome::Kind::Failed;
    out.error_code = codes::kInternal;
    out.message = e.what();
  }
  if (run) out.device_time = run->device_time();
  return out;
}

}  // namespace qrt
