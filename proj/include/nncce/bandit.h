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

#ifndef NNCCE_BANDIT_H_
#define NNCCE_BANDIT_H_

// EXP-IX: exponential weights with implicit exploration (Neu, 2015).
//
// Weights live in the log domain; the probability vector is recovered with a
// max-shifted softmax so that long runs never underflow.

#include <cstdint>
#include <span>
#include <vector>

#include "nncce/util.h"

namespace nncce {

struct WeightRow {
  std::vector<double> log_weights;

  static WeightRow Uniform(int num_actions) {
    return WeightRow{std::vector<double>(num_actions, 0.0)};
  }
  int size() const { return static_cast<int>(log_weights.size()); }
  // exp(log_weights - max), i.e. weights up to a common positive factor.
  std::vector<double> Weights() const;
};

struct IxParams {
  double eta = 0.1;       // learning rate
  double gamma_ix = 0.05;  // implicit exploration

  void Validate() const;
};

struct RegretTrace {
  double cumulative_loss_incurred = 0.0;
  std::vector<double> cumulative_loss_per_arm;
  int64_t rounds = 0;

  explicit RegretTrace(int num_actions = 0)
      : cumulative_loss_per_arm(num_actions, 0.0) {}

  // `losses` is the full loss vector of the round; `chosen` the played arm.
  void Record(int chosen, std::span<const double> losses);
};

std::vector<double> PolicyFromWeights(const WeightRow& weights);

// Arms with playable[i] == false get probability exactly 0.
std::vector<double> PolicyFromWeights(const WeightRow& weights,
                                      const std::vector<bool>& playable);
// Allocation-free variant for inner loops; `out` is resized to K.
void PolicyFromWeightsInto(const WeightRow& weights,
                           const std::vector<bool>& playable,
                           std::vector<double>& out);

// One EXP-IX step: only the chosen arm moves, by -eta * loss / (p + gamma).
// Throws ContractViolation if loss is outside [0, 1] or p_chosen outside
// (0, 1].
WeightRow IxUpdate(const WeightRow& weights, int chosen, double loss,
                   double p_chosen, const IxParams& params);
void ApplyIxUpdate(WeightRow& weights, int chosen, double loss,
                   double p_chosen, const IxParams& params);

// eta = sqrt(2 ln K / (K T)), gamma = eta / 2.
IxParams DefaultSchedule(int num_actions, int64_t rounds);

// Realized regret against the best fixed arm in hindsight; may be negative.
double Regret(const RegretTrace& trace);

// Single-agent EXP-IX learner over K arms with a known horizon.
class ExpIxLearner {
 public:
  ExpIxLearner(int num_actions, const IxParams& params);

  int num_actions() const { return weights_.size(); }
  const WeightRow& weights() const { return weights_; }
  const std::vector<double>& policy() const { return policy_; }

  int Sample(Rng& rng) const;
  // Bandit feedback: only the loss of the played arm is revealed.
  void Update(int chosen, double loss);

 private:
  WeightRow weights_;
  IxParams params_;
  std::vector<double> policy_;
};

}  // namespace nncce

#endif  // NNCCE_BANDIT_H_
