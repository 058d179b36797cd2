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

#include <algorithm>
#include <cmath>
#include <limits>

namespace nncce {

std::vector<double> WeightRow::Weights() const {
  std::vector<double> w(log_weights.size());
  if (w.empty()) return w;
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  for (size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights[i] - top);
  return w;
}

void IxParams::Validate() const {
  if (!std::isfinite(eta) || eta <= 0.0) {
    throw ContractViolation(StrCat("eta must be finite and positive, got ", eta));
  }
  if (!std::isfinite(gamma_ix) || gamma_ix < 0.0) {
    throw ContractViolation(
        StrCat("gamma_ix must be finite and >= 0, got ", gamma_ix));
  }
}

void RegretTrace::Record(int chosen, std::span<const double> losses) {
  cumulative_loss_incurred += losses[chosen];
  for (size_t i = 0; i < losses.size(); ++i) {
    cumulative_loss_per_arm[i] += losses[i];
  }
  ++rounds;
}

std::vector<double> PolicyFromWeights(const WeightRow& weights) {
  std::vector<double> p = weights.Weights();
  double total = 0.0;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  return p;
}

void PolicyFromWeightsInto(const WeightRow& weights,
                           const std::vector<bool>& playable,
                           std::vector<double>& out) {
  const int k = weights.size();
  double top = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    if (playable[i]) top = std::max(top, weights.log_weights[i]);
  }
  if (!std::isfinite(top)) {
    throw ContractViolation("PolicyFromWeights: no playable action");
  }
  out.assign(k, 0.0);
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    if (!playable[i]) continue;
    out[i] = std::exp(weights.log_weights[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
}

std::vector<double> PolicyFromWeights(const WeightRow& weights,
                                      const std::vector<bool>& playable) {
  std::vector<double> p;
  PolicyFromWeightsInto(weights, playable, p);
  return p;
}

void ApplyIxUpdate(WeightRow& weights, int chosen, double loss,
                   double p_chosen, const IxParams& params) {
  if (!(loss >= 0.0 && loss <= 1.0)) {
    throw ContractViolation(StrCat("IxUpdate: loss ", loss, " outside [0,1]"));
  }
  if (!(p_chosen > 0.0 && p_chosen <= 1.0 + 1e-12)) {
    throw ContractViolation(
        StrCat("IxUpdate: p_chosen ", p_chosen, " outside (0,1]"));
  }
  if (chosen < 0 || chosen >= weights.size()) {
    throw ContractViolation(StrCat("IxUpdate: arm ", chosen, " out of range"));
  }
  weights.log_weights[chosen] -=
      params.eta * loss / (p_chosen + params.gamma_ix);
}

WeightRow IxUpdate(const WeightRow& weights, int chosen, double loss,
                   double p_chosen, const IxParams& params) {
  WeightRow next = weights;
  ApplyIxUpdate(next, chosen, loss, p_chosen, params);
  return next;
}

IxParams DefaultSchedule(int num_actions, int64_t rounds) {
  if (num_actions < 2) {
    throw ContractViolation(
        StrCat("DefaultSchedule: need K >= 2, got ", num_actions));
  }
  if (rounds < 1) {
    throw ContractViolation(StrCat("DefaultSchedule: need T >= 1, got ", rounds));
  }
  const double k = num_actions;
  const double eta =
      std::sqrt(2.0 * std::log(k) / (k * static_cast<double>(rounds)));
  return IxParams{eta, eta / 2.0};
}

double Regret(const RegretTrace& trace) {
  const double best = *std::min_element(trace.cumulative_loss_per_arm.begin(),
                                        trace.cumulative_loss_per_arm.end());
  return trace.cumulative_loss_incurred - best;
}

ExpIxLearner::ExpIxLearner(int num_actions, const IxParams& params)
    : weights_(WeightRow::Uniform(num_actions)),
      params_(params),
      policy_(PolicyFromWeights(weights_)) {
  params_.Validate();
}

int ExpIxLearner::Sample(Rng& rng) const {
  return SampleCategorical(policy_, rng);
}

void ExpIxLearner::Update(int chosen, double loss) {
  ApplyIxUpdate(weights_, chosen, loss, policy_[chosen], params_);
  policy_ = PolicyFromWeights(weights_);
}

}  // namespace nncce
