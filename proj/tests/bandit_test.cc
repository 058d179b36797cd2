// Copyright 2026 The NN-CCE Authors.
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

#include "nncce/bandit.h"

#include <cmath>
#include <numeric>

#include "doctest.h"

namespace nncce {
namespace {

TEST_CASE("policy from uniform weights") {
  const auto p = PolicyFromWeights(WeightRow::Uniform(4));
  for (double v : p) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("policy from log-weights (0, ln 3)") {
  const auto p = PolicyFromWeights(WeightRow{{0.0, std::log(3.0)}});
  CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("policy survives extreme log-weights") {
  const auto p = PolicyFromWeights(WeightRow{{0.0, -1e6}});
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 0.0);
  const auto q = PolicyFromWeights(WeightRow{{1e300, -1e300, 5.0}});
  for (double v : q) CHECK(std::isfinite(v));
}

TEST_CASE("masked policy zeroes unplayable arms") {
  const auto p = PolicyFromWeights(WeightRow{{5.0, 0.0, 0.0}},
                                   std::vector<bool>{false, true, true});
  CHECK(p == std::vector<double>{0.0, 0.5, 0.5});
  CHECK_THROWS_AS(PolicyFromWeights(WeightRow{{0.0}}, std::vector<bool>{false}),
                  ContractViolation);
}

TEST_CASE("ix update with zero loss leaves weights unchanged") {
  const WeightRow w{{0.3, -0.2}};
  const auto next = IxUpdate(w, 1, 0.0, 0.4, IxParams{0.5, 0.1});
  CHECK(next.log_weights == w.log_weights);
}

TEST_CASE("ix update reference step") {
  const auto next =
      IxUpdate(WeightRow::Uniform(2), 0, 1.0, 0.5, IxParams{0.1, 0.05});
  CHECK(next.log_weights[0] == doctest::Approx(-0.1 / 0.55).epsilon(1e-12));
  CHECK(next.log_weights[1] == 0.0);
  const auto p = PolicyFromWeights(next);
  // 1 / (1 + e^{0.181818...}) computed by hand.
  CHECK(p[0] == doctest::Approx(0.4546703).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(0.5453297).epsilon(1e-6));
}

TEST_CASE("ix update rejects out-of-range inputs") {
  const IxParams params{0.1, 0.05};
  CHECK_THROWS_AS(IxUpdate(WeightRow::Uniform(2), 0, 1.5, 0.5, params),
                  ContractViolation);
  CHECK_THROWS_AS(IxUpdate(WeightRow::Uniform(2), 0, -0.1, 0.5, params),
                  ContractViolation);
  CHECK_THROWS_AS(IxUpdate(WeightRow::Uniform(2), 0, 0.5, 0.0, params),
                  ContractViolation);
  CHECK_THROWS_AS(IxParams({0.0, 0.1}).Validate(), ContractViolation);
  CHECK_THROWS_AS(IxParams({0.1, -0.1}).Validate(), ContractViolation);
}

TEST_CASE("repeated unit loss on one arm monotonically shrinks its mass") {
  WeightRow w = WeightRow::Uniform(2);
  const IxParams params{0.05, 0.025};
  double previous = 0.5;
  for (int t = 0; t < 200; ++t) {
    const double p0 = PolicyFromWeights(w)[0];
    ApplyIxUpdate(w, 0, 1.0, p0, params);
    const double now = PolicyFromWeights(w)[0];
    CHECK(now < previous);
    previous = now;
  }
}

TEST_CASE("ix update is shift invariant in policy space") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + UniformInt(rng, 6);
    WeightRow w = WeightRow::Uniform(k);
    for (double& v : w.log_weights) v = 20.0 * (Uniform01(rng) - 0.5);
    WeightRow shifted = w;
    const double c = 1000.0 * (Uniform01(rng) - 0.5);
    for (double& v : shifted.log_weights) v += c;
    const int arm = UniformInt(rng, k);
    const double loss = Uniform01(rng);
    const IxParams params{0.01 + Uniform01(rng), 0.5 * Uniform01(rng)};
    const double p = PolicyFromWeights(w)[arm];
    const auto a = PolicyFromWeights(IxUpdate(w, arm, loss, p, params));
    const auto b = PolicyFromWeights(IxUpdate(shifted, arm, loss, p, params));
    for (int i = 0; i < k; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
    double total = std::accumulate(a.begin(), a.end(), 0.0);
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("default schedule") {
  const IxParams p = DefaultSchedule(10, 10000);
  CHECK(p.eta == doctest::Approx(0.0067861404).epsilon(1e-8));
  CHECK(p.gamma_ix == doctest::Approx(0.0033930702).epsilon(1e-8));
  // T chosen so that eta = 1 for K = 2: 2 ln 2 / (2 T) = 1.
  const IxParams unit = DefaultSchedule(2, 1);
  CHECK(unit.eta == doctest::Approx(std::sqrt(std::log(2.0))));
  for (int k : {2, 3, 7, 50}) {
    for (int64_t t : {1, 10, 12345}) {
      const IxParams q = DefaultSchedule(k, t);
      CHECK(q.gamma_ix == q.eta / 2.0);
      CHECK(q.eta > 0.0);
    }
  }
  CHECK_THROWS_AS(DefaultSchedule(1, 10), ContractViolation);
  CHECK_THROWS_AS(DefaultSchedule(3, 0), ContractViolation);
}

TEST_CASE("regret of indifferent and best-arm play") {
  RegretTrace same(3);
  RegretTrace best(2);
  for (int t = 0; t < 100; ++t) {
    const std::vector<double> flat{0.4, 0.4, 0.4};
    same.Record(t % 3, flat);
    const std::vector<double> losses{0.2, 0.7};
    best.Record(0, losses);
  }
  CHECK(Regret(same) == doctest::Approx(0.0));
  CHECK(Regret(best) == doctest::Approx(0.0));
}

// Adversarial two-arm sequence: losses alternate in blocks of growing length,
// which defeats follow-the-leader style play.
TEST_CASE("EXP-IX regret stays below the high-probability bound") {
  const int k = 2;
  const int64_t horizon = 10000;
  const double bound = 4.0 * std::sqrt(2.0 * k * horizon * std::log(k));
  double mean_regret = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    ExpIxLearner learner(k, DefaultSchedule(k, horizon));
    RegretTrace trace(k);
    int64_t block = 1;
    int64_t in_block = 0;
    int bad = 0;
    for (int64_t t = 0; t < horizon; ++t) {
      std::vector<double> losses(k, 0.0);
      losses[bad] = 1.0;
      const int arm = learner.Sample(rng);
      trace.Record(arm, losses);
      learner.Update(arm, losses[arm]);
      if (++in_block == block) {
        in_block = 0;
        block *= 2;
        bad = 1 - bad;
      }
    }
    mean_regret += Regret(trace) / 20.0;
  }
  CHECK(mean_regret <= bound);
}

}  // namespace
}  // namespace nncce
