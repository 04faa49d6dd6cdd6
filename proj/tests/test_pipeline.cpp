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

#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "qrt/pipeline/pipeline.hpp"

using namespace qrt;

namespace {

Circuit bell() {
  Circuit c(2, 2);
  c.add(Gate::H, {0}).add(Gate::Cx, {0, 1});
  c.measure(0, 0).measure(1, 1);
  return c;
}

Executor sampler(NoiseModel noise, std::uint64_t seed) {
  auto calls = std::make_shared<std::uint64_t>(0);
  return [noise, seed, calls](const Circuit& c, std::int64_t shots) {
    return simulate_counts(c, noise, shots, seed + (*calls)++);
  };
}

// Records the order of pre/post calls; expands into `fanout` copies.
class Probe final : public EnrichedExecutionBackend {
 public:
  Probe(std::string label, std::vector<std::string>& log, int fanout = 1)
      : label_(std::move(label)), log_(log), fanout_(fanout) {}
  std::string name() const override { return label_; }

 protected:
  std::vector<Variant> pre(const Variant& input) override {
    log_.push_back(label_ + ".pre");
    return std::vector<Variant>(static_cast<std::size_t>(fanout_), input);
  }
  StageResult post(const Variant&, std::vector<StageResult> results) override {
    log_.push_back(label_ + ".post");
    return results.front();
  }

 private:
  std::string label_;
  std::vector<std::string>& log_;
  int fanout_;
};

}  // namespace

TEST_CASE("expectation_z examples") {
  CHECK(expectation_z(Counts{{{"00", 512}, {"11", 512}}, 1024}) == 1.0);
  CHECK(expectation_z(Counts{{{"01", 1024}}, 1024}) == -1.0);
  CHECK(expectation_z(Counts{{{"00", 1}, {"01", 1}, {"10", 1}, {"11", 1}}, 4}) == 0.0);
  CHECK(expectation_z(Counts{{{"01", 10}}, 10}, "IZ") == -1.0);
  CHECK(expectation_z(Counts{{{"01", 10}}, 10}, "ZI") == 1.0);
  CHECK_THROWS_AS((void)expectation_z(Counts{{{"01", 10}}, 10}, "XZ"), Error);
  CHECK_THROWS_AS((void)expectation_z(Counts{}, ""), Error);
}

TEST_CASE("resolve builds chains from the registry") {
  const auto registry = StageRegistry::with_builtin_stages();
  auto one = StageChain::resolve({{"ErrorMitigatedExecutionBackend"}}, registry);
  CHECK(one.size() == 1);
  CHECK(one.names() == std::vector<std::string>{"ErrorMitigatedExecutionBackend"});
  CHECK(StageChain::resolve({}, registry).size() == 0);
  try {
    (void)StageChain::resolve({{"zne"}, {"nope"}}, registry);
    FAIL("expected UnknownStage");
  } catch (const Error& e) {
    CHECK(e.code() == codes::kUnknownStage);
    CHECK(e.details()["stage"] == "nope");
  }
  StageRegistry custom;
  custom.add("option2", [](const nlohmann::json&) -> StagePtr { return std::make_unique<ZneStage>(); });
  CHECK(StageChain::resolve({{"option2"}}, custom).size() == 1);
}

TEST_CASE("identity chain equals bare execution") {
  auto chain = StageChain::resolve({}, StageRegistry::with_builtin_stages());
  const auto r = chain.run(bell(), 4096, "ZZ", sampler(NoiseModel::noiseless(), 5));
  CHECK(std::abs(r.value - 1.0) <= 0.05);
  CHECK(*r.counts == simulate_counts(bell(), NoiseModel::noiseless(), 4096, 5));

  NoiseModel noisy;
  noisy.default_1q = noisy.default_2q = 0.05;
  const auto n = chain.run(bell(), 1000, "", sampler(noisy, 11));
  CHECK(*n.counts == simulate_counts(bell(), noisy, 1000, 11));
}

TEST_CASE("wrapping order is outer pre first, outer post last") {
  std::vector<std::string> log;
  StageRegistry r;
  r.add("A", [&](const nlohmann::json&) -> StagePtr { return std::make_unique<Probe>("A", log); });
  r.add("B", [&](const nlohmann::json&) -> StagePtr { return std::make_unique<Probe>("B", log); });
  auto chain = StageChain::resolve({{"A"}, {"B"}}, r);
  (void)chain.run(bell(), 16, "", [&](const Circuit& c, std::int64_t shots) {
    log.push_back("exec");
    return simulate_counts(c, NoiseModel::noiseless(), shots, 1);
  });
  CHECK(log == std::vector<std::string>{"A.pre", "B.pre", "exec", "B.post", "A.post"});
}

TEST_CASE("a stage expanding to 3 variants runs the executor 3 times") {
  std::vector<std::string> log;
  StageRegistry r;
  r.add("fan", [&](const nlohmann::json&) -> StagePtr { return std::make_unique<Probe>("fan", log, 3); });
  auto chain = StageChain::resolve({{"fan"}}, r);
  int calls = 0;
  (void)chain.run(bell(), 8, "", [&](const Circuit& c, std::int64_t shots) {
    ++calls;
    return simulate_counts(c, NoiseModel::noiseless(), shots, 1);
  });
  CHECK(calls == 3);
}

TEST_CASE("executor errors abort the chain") {
  auto chain = StageChain::resolve({{"zne"}}, StageRegistry::with_builtin_stages());
  CHECK_THROWS_AS((void)chain.run(bell(), 8, "",
                                  [](const Circuit&, std::int64_t) -> Counts {
                                    throw Error(codes::kExecutionFailed, "boom");
                                  }),
                  Error);
}

TEST_CASE("zne folding") {
  Circuit x(1, 1);
  x.add(Gate::X, {0});
  x.measure(0, 0);
  CHECK(zne_fold(x, 1) == x);
  const auto x3 = zne_fold(x, 3);
  REQUIRE(x3.size() == 4);
  for (int i = 0; i < 3; ++i) CHECK(x3.instructions()[i].gate == Gate::X);
  CHECK_THROWS_AS((void)zne_fold(x, 2), Error);
  CHECK_THROWS_AS((void)zne_fold(x, 0), Error);

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = oracle::random_circuit(rng, 4, 12);
    for (int s : {3, 5}) {
      const auto f = zne_fold(c, s);
      CHECK(oracle::phase_distance(oracle::state(c), oracle::state(f)) < 1e-9);
    }
  }
}

TEST_CASE("richardson extrapolation") {
  CHECK(richardson_extrapolate({{1, 0.9}, {3, 0.7}, {5, 0.5}}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(richardson_extrapolate({{1, 0.42}, {3, 0.42}}) == doctest::Approx(0.42).epsilon(1e-12));
  // Closed form for non-collinear points: intercept = ybar - slope * xbar.
  const double slope = ((1 - 3) * (0.9 - 0.7) + (3 - 3) * (0.75 - 0.7) + (5 - 3) * (0.45 - 0.7)) / 8.0;
  CHECK(richardson_extrapolate({{1, 0.9}, {3, 0.75}, {5, 0.45}}) ==
        doctest::Approx(0.7 - slope * 3).epsilon(1e-12));
  for (const auto& bad : {std::vector<std::pair<double, double>>{{1, 0.5}},
                          std::vector<std::pair<double, double>>{{3, 0.5}, {3, 0.4}}, {}}) {
    try {
      (void)richardson_extrapolate(bad);
      FAIL("expected DegenerateInput");
    } catch (const Error& e) {
      CHECK(e.code() == codes::kDegenerateInput);
    }
  }
}

TEST_CASE("noiseless expectation does not depend on fold scale") {
  Circuit c(2, 2);
  c.add(Gate::Ry, {0}, {ParamExpr::literal(1.1)}).add(Gate::Cx, {0, 1});
  c.measure(0, 0).measure(1, 1);
  const double ideal = 1.0;  // a|00> + b|11> has even parity
  for (int s : {1, 3, 5, 7}) {
    const auto counts = simulate_counts(zne_fold(c, s), NoiseModel::noiseless(), 4096, 3);
    CHECK(std::abs(expectation_z(counts) - ideal) < 1e-12);
    CHECK(std::abs(expectation_z(counts, "IZ") - std::cos(1.1)) < 0.06);
  }
}

TEST_CASE("zne stage beats the raw estimate on a noisy Bell circuit") {
  Circuit c(2, 2);
  c.add(Gate::H, {0}).add(Gate::Cx, {0, 1}).add(Gate::X, {0}).add(Gate::X, {1});
  c.measure(0, 0).measure(1, 1);
  NoiseModel noise;
  noise.default_1q = noise.default_2q = 0.02;
  int wins = 0;
  for (int trial = 0; trial < 10; ++trial) {
    auto chain = StageChain::resolve({{"ErrorMitigatedExecutionBackend", {{"scales", {1, 3, 5}}}}},
                                     StageRegistry::with_builtin_stages());
    const auto r = chain.run(c, 4096, "ZZ", sampler(noise, 1000 * trial));
    const double raw = r.metadata["raw_value"].get<double>();
    if (std::abs(r.value - 1.0) < std::abs(raw - 1.0)) ++wins;
    CHECK(r.metadata["scale_factors"] == nlohmann::json{1, 3, 5});
    CHECK(r.counts.has_value());
  }
  CHECK(wins >= 8);
}

TEST_CASE("readout mitigation examples") {
  Circuit one(1, 1);
  one.measure(0, 0);
  const auto registry = StageRegistry::with_builtin_stages();

  auto clean = StageChain::resolve({{"readout_mitigation"}}, registry);
  CHECK(clean.run(one, 1000, "", sampler(NoiseModel::noiseless(), 1)).value == 1.0);

  NoiseModel flip;
  flip.readout_error = {0.1};
  auto chain = StageChain::resolve({{"readout_mitigation"}}, registry);
  const auto r = chain.run(one, 8192, "", sampler(flip, 2));
  CHECK(std::abs(r.metadata["raw_value"].get<double>() - 0.8) < 0.03);
  CHECK(std::abs(r.value - 1.0) <= 0.05);

  flip.readout_error = {0.5};
  try {
    (void)chain.run(one, 4096, "", sampler(flip, 3));
    FAIL("expected SingularConfusion");
  } catch (const Error& e) {
    CHECK(e.code() == codes::kSingularConfusion);
  }
  auto known = StageChain::resolve({{"readout_mitigation", {{"readout_errors", {0.5}}}}}, registry);
  CHECK_THROWS_AS((void)known.run(one, 100, "", sampler(NoiseModel::noiseless(), 1)), Error);
}

TEST_CASE("readout correction is exact on exact distributions") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0), err(0.0, 0.3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const int dim = 1 << n;
    std::vector<double> truth(dim);
    double norm = 0;
    for (auto& p : truth) norm += (p = u(rng));
    for (auto& p : truth) p /= norm;
    std::vector<ReadoutConfusion> conf(n);
    for (auto& f : conf) f = {err(rng), err(rng)};

    // Forward channel: read each bit through its own confusion, independently.
    std::map<std::string, double> observed;
    for (int in = 0; in < dim; ++in) {
      for (int out = 0; out < dim; ++out) {
        double pr = truth[in];
        for (int b = 0; b < n; ++b) {
          const int x = (in >> b) & 1, y = (out >> b) & 1;
          const double flip = x ? conf[b].p0_given_1 : conf[b].p1_given_0;
          pr *= x == y ? 1 - flip : flip;
        }
        std::string key(n, '0');
        for (int b = 0; b < n; ++b) {
          if ((out >> b) & 1) key[n - 1 - b] = '1';
        }
        observed[key] += pr;
      }
    }
    std::string obs(n, 'I');
    for (int b = 0; b < n; ++b) {
      if (rng() % 2) obs[n - 1 - b] = 'Z';
    }
    double expect = 0;
    for (int in = 0; in < dim; ++in) {
      int parity = 0;
      for (int b = 0; b < n; ++b) {
        if (obs[n - 1 - b] == 'Z') parity ^= (in >> b) & 1;
      }
      expect += (parity ? -1 : 1) * truth[in];
    }
    CHECK(std::abs(mitigated_expectation(observed, conf, obs) - expect) < 1e-9);
  }
}

TEST_CASE("readout inside zne composes") {
  Circuit c(2, 2);
  c.add(Gate::H, {0}).add(Gate::Cx, {0, 1});
  c.measure(0, 0).measure(1, 1);
  NoiseModel noise;
  noise.readout_error = {0.05, 0.08};
  auto chain = StageChain::resolve({{"zne"}, {"readout_mitigation"}}, StageRegistry::with_builtin_stages());
  int calls = 0;
  const auto r = chain.run(c, 4096, "ZZ", [&](const Circuit& circ, std::int64_t shots) {
    return simulate_counts(circ, noise, shots, 77 + calls++);
  });
  CHECK(calls == 9);
  CHECK(std::abs(r.value - 1.0) < 0.05);
}
