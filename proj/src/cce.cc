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

#include "nncce/cce.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nncce {

ActionMask FullMask(const std::vector<int>& action_counts) {
  ActionMask mask;
  for (int a : action_counts) mask.emplace_back(a, true);
  return mask;
}

void ValidateMask(const ActionMask& mask, const std::vector<int>& counts) {
  if (mask.size() != counts.size()) {
    throw ContractViolation("action mask has the wrong number of players");
  }
  for (size_t p = 0; p < counts.size(); ++p) {
    if (static_cast<int>(mask[p].size()) != counts[p]) {
      throw ContractViolation(StrCat("action mask row ", p, " has size ",
                                     mask[p].size(), ", expected ", counts[p]));
    }
    if (std::find(mask[p].begin(), mask[p].end(), true) == mask[p].end()) {
      throw ContractViolation(StrCat("player ", p, " has no playable action"));
    }
  }
}

// -- StageGame --------------------------------------------------------------

StageGame StageGame::Dense(std::vector<int> action_counts,
                           std::vector<double> losses) {
  StageGame stage;
  stage.num_joint_ = NumJointActions(action_counts);
  if (static_cast<int64_t>(losses.size()) !=
      stage.num_joint_ * static_cast<int64_t>(action_counts.size())) {
    throw ContractViolation("dense loss tensor has the wrong size");
  }
  stage.action_counts_ = std::move(action_counts);
  stage.dense_ = std::move(losses);
  return stage;
}

StageGame StageGame::FromOracle(std::vector<int> action_counts,
                                LossOracle oracle) {
  StageGame stage;
  stage.num_joint_ = NumJointActions(action_counts);
  stage.action_counts_ = std::move(action_counts);
  stage.oracle_ = std::move(oracle);
  return stage;
}

std::vector<double> StageGame::Losses(const JointAction& joint) const {
  if (has_dense()) {
    const int64_t j = JointActionIndex(action_counts_, joint);
    const int n = num_players();
    return std::vector<double>(dense_.begin() + j * n,
                               dense_.begin() + (j + 1) * n);
  }
  return oracle_(joint);
}

bool StageGame::Densify(int64_t cap) {
  if (has_dense()) return true;
  if (num_joint_ > cap) return false;
  const int n = num_players();
  dense_.resize(num_joint_ * n);
  for (int64_t j = 0; j < num_joint_; ++j) {
    const auto losses = oracle_(JointActionFromIndex(action_counts_, j));
    std::copy(losses.begin(), losses.end(), dense_.begin() + j * n);
  }
  return true;
}

// -- Loss normalization -----------------------------------------------------

std::vector<std::vector<double>> NormalizeLosses(
    const std::vector<std::vector<double>>& rewards) {
  std::vector<std::vector<double>> losses = rewards;
  if (rewards.empty()) return losses;
  const size_t n = rewards.front().size();
  for (size_t p = 0; p < n; ++p) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& row : rewards) {
      lo = std::min(lo, row[p]);
      hi = std::max(hi, row[p]);
    }
    for (auto& row : losses) {
      row[p] = hi > lo ? 1.0 - (row[p] - lo) / (hi - lo) : 0.5;
    }
  }
  return losses;
}

// -- MA-EXP-IX --------------------------------------------------------------

std::vector<IxParams> DefaultStageParams(const ActionMask& mask,
                                         int64_t rounds) {
  std::vector<IxParams> params;
  for (const auto& row : mask) {
    const int playable = static_cast<int>(std::count(row.begin(), row.end(), true));
    params.push_back(DefaultSchedule(std::max(2, playable), rounds));
  }
  return params;
}

CceOutcome MaExpIx(const StageGame& stage, int64_t rounds,
                   const std::vector<IxParams>& params,
                   const ActionMask& mask, Rng& rng) {
  if (rounds < 1) throw ContractViolation("MaExpIx: rounds must be >= 1");
  const int n = stage.num_players();
  const auto& counts = stage.action_counts();
  ValidateMask(mask, counts);
  if (static_cast<int>(params.size()) != n) {
    throw ContractViolation("MaExpIx: need one IxParams per player");
  }
  for (const auto& p : params) p.Validate();

  CceOutcome out;
  out.action_counts = counts;
  out.rounds = rounds;
  out.weights.reserve(n);
  for (int a : counts) out.weights.push_back(WeightRow::Uniform(a));
  out.policies.resize(n);
  for (int p = 0; p < n; ++p) out.policies[p].assign(counts[p], 0.0);
  std::vector<double> loss_sum(n, 0.0);

  std::vector<std::vector<double>> policy(n);
  JointAction joint(n);
  std::vector<double> losses(n);
  const bool dense = stage.has_dense();

  for (int64_t t = 0; t < rounds; ++t) {
    for (int p = 0; p < n; ++p) {
      PolicyFromWeightsInto(out.weights[p], mask[p], policy[p]);
      joint[p] = SampleCategorical(policy[p], rng);
      for (int a = 0; a < counts[p]; ++a) out.policies[p][a] += policy[p][a];
    }
    const int64_t j = JointActionIndex(counts, joint);
    if (dense) {
      for (int p = 0; p < n; ++p) losses[p] = stage.DenseLoss(j, p);
    } else {
      losses = stage.Losses(joint);
    }
    for (int p = 0; p < n; ++p) {
      if (!(losses[p] >= 0.0 && losses[p] <= 1.0)) {
        std::ostringstream msg;
        msg << "stage loss " << losses[p] << " for player " << p
            << " outside [0,1] at joint action (";
        for (int q = 0; q < n; ++q) msg << (q ? "," : "") << joint[q];
        msg << ")";
        throw RuntimeFailure(msg.str());
      }
    }
    ++out.empirical_joint[j];
    for (int p = 0; p < n; ++p) {
      loss_sum[p] += losses[p];
      ApplyIxUpdate(out.weights[p], joint[p], losses[p], policy[p][joint[p]],
                    params[p]);
    }
  }

  out.values.resize(n);
  out.final_policies.resize(n);
  for (int p = 0; p < n; ++p) {
    out.values[p] = 1.0 - loss_sum[p] / static_cast<double>(rounds);
    for (double& v : out.policies[p]) v /= static_cast<double>(rounds);
    out.final_policies[p] = PolicyFromWeights(out.weights[p], mask[p]);
  }
  return out;
}

// -- Dominance pruning ------------------------------------------------------

namespace {

std::vector<int64_t> Strides(const std::vector<int>& counts) {
  std::vector<int64_t> strides(counts.size(), 1);
  for (int p = static_cast<int>(counts.size()) - 2; p >= 0; --p) {
    strides[p] = strides[p + 1] * counts[p + 1];
  }
  return strides;
}

bool JointAllowed(const JointAction& joint, const ActionMask& mask,
                  int skip_player) {
  for (size_t q = 0; q < joint.size(); ++q) {
    if (static_cast<int>(q) != skip_player && !mask[q][joint[q]]) return false;
  }
  return true;
}

}  // namespace

PruneResult PruneDominated(const StageGame& stage, const ActionMask& initial) {
  PruneResult result;
  result.mask = initial;
  const auto& counts = stage.action_counts();
  ValidateMask(initial, counts);
  if (!stage.has_dense()) {
    result.diagnostic = StrCat("pruning skipped: joint space of ",
                               stage.num_joint_actions(),
                               " actions has no dense loss tensor");
    return result;
  }
  const int n = stage.num_players();
  const auto strides = Strides(counts);
  const int64_t total = stage.num_joint_actions();

  bool changed = true;
  while (changed) {
    changed = false;
    for (int p = 0; p < n; ++p) {
      // Opponent profiles, represented by the joint index with p's action 0.
      std::vector<int64_t> bases;
      for (int64_t j = 0; j < total; ++j) {
        const JointAction joint = JointActionFromIndex(counts, j);
        if (joint[p] == 0 && JointAllowed(joint, result.mask, p)) {
          bases.push_back(j);
        }
      }
      for (int a = 0; a < counts[p]; ++a) {
        if (!result.mask[p][a]) continue;
        for (int b = 0; b < counts[p]; ++b) {
          if (b == a || !result.mask[p][b]) continue;
          bool dominated = true;
          for (int64_t base : bases) {
            if (!(stage.DenseLoss(base + b * strides[p], p) <
                  stage.DenseLoss(base + a * strides[p], p))) {
              dominated = false;
              break;
            }
          }
          if (dominated) {
            result.mask[p][a] = false;
            ++result.removed;
            changed = true;
            break;
          }
        }
      }
    }
  }
  return result;
}

// -- CCE verification -------------------------------------------------------

double VerifyCce(const JointDistribution& dist, const StageGame& stage,
                 const ActionMask& deviations) {
  if (!stage.has_dense()) {
    throw ContractViolation("VerifyCce needs a dense loss tensor");
  }
  const auto& counts = stage.action_counts();
  const int n = stage.num_players();
  double total = 0.0;
  for (const auto& [joint, prob] : dist) total += prob;
  if (std::abs(total - 1.0) > 1e-9) {
    throw ContractViolation(
        StrCat("joint distribution sums to ", total, ", expected 1"));
  }
  const auto strides = Strides(counts);
  double epsilon = 0.0;
  for (int p = 0; p < n; ++p) {
    double expected = 0.0;
    std::vector<double> deviated(counts[p], 0.0);
    for (const auto& [joint, prob] : dist) {
      const int64_t j = JointActionIndex(counts, joint);
      expected += prob * stage.DenseLoss(j, p);
      const int64_t base = j - joint[p] * strides[p];
      for (int a = 0; a < counts[p]; ++a) {
        deviated[a] += prob * stage.DenseLoss(base + a * strides[p], p);
      }
    }
    for (int a = 0; a < counts[p]; ++a) {
      if (!deviations.empty() && !deviations[p][a]) continue;
      epsilon = std::max(epsilon, expected - deviated[a]);
    }
  }
  return epsilon;
}

JointDistribution EmpiricalToDistribution(const CceOutcome& outcome) {
  if (outcome.rounds < 1) {
    throw ContractViolation("EmpiricalToDistribution: no rounds recorded");
  }
  JointDistribution dist;
  for (const auto& [j, count] : outcome.empirical_joint) {
    dist.emplace_back(JointActionFromIndex(outcome.action_counts, j),
                      static_cast<double>(count) /
                          static_cast<double>(outcome.rounds));
  }
  return dist;
}

std::vector<double> RealizedRegret(const CceOutcome& outcome,
                                   const StageGame& stage,
                                   const ActionMask& deviations) {
  const auto dist = EmpiricalToDistribution(outcome);
  const auto& counts = stage.action_counts();
  const auto strides = Strides(counts);
  std::vector<double> regret(stage.num_players(), 0.0);
  for (int p = 0; p < stage.num_players(); ++p) {
    double incurred = 0.0;
    std::vector<double> fixed(counts[p], 0.0);
    for (const auto& [joint, prob] : dist) {
      const int64_t j = JointActionIndex(counts, joint);
      incurred += prob * stage.DenseLoss(j, p);
      const int64_t base = j - joint[p] * strides[p];
      for (int a = 0; a < counts[p]; ++a) {
        fixed[a] += prob * stage.DenseLoss(base + a * strides[p], p);
      }
    }
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < counts[p]; ++a) {
      if (!deviations.empty() && !deviations[p][a]) continue;
      best = std::min(best, fixed[a]);
    }
    regret[p] = (incurred - best) * static_cast<double>(outcome.rounds);
  }
  return regret;
}

JointDistribution ParseDistribution(const std::string& text, int num_players) {
  JointDistribution dist;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto fields = Split(trimmed, ',');
    if (static_cast<int>(fields.size()) != num_players + 1) {
      throw ContractViolation(StrCat("distribution line ", line_no, ": expected ",
                                     num_players + 1, " fields"));
    }
    JointAction joint(num_players);
    try {
      for (int p = 0; p < num_players; ++p) joint[p] = std::stoi(fields[p]);
      dist.emplace_back(std::move(joint), std::stod(fields[num_players]));
    } catch (const std::exception&) {
      throw ContractViolation(
          StrCat("distribution line ", line_no, ": malformed number"));
    }
  }
  return dist;
}

// -- Stage solving ----------------------------------------------------------

StageSolution SolveStage(const std::vector<int>& action_counts,
                         const ActionMask& legal,
                         const std::vector<std::vector<double>>& payoffs,
                         const StageSolveOptions& options, Rng& rng) {
  ValidateMask(legal, action_counts);
  const int n = static_cast<int>(action_counts.size());
  const int64_t total = NumJointActions(action_counts);
  if (static_cast<int64_t>(payoffs.size()) != total) {
    throw ContractViolation("SolveStage: payoff table has the wrong size");
  }

  std::vector<int64_t> legal_joints;
  std::vector<std::vector<double>> legal_payoffs;
  for (int64_t j = 0; j < total; ++j) {
    if (JointAllowed(JointActionFromIndex(action_counts, j), legal, -1)) {
      legal_joints.push_back(j);
      legal_payoffs.push_back(payoffs[j]);
    }
  }
  std::vector<double> lo(n, std::numeric_limits<double>::infinity());
  std::vector<double> hi(n, -std::numeric_limits<double>::infinity());
  for (const auto& row : legal_payoffs) {
    for (int p = 0; p < n; ++p) {
      lo[p] = std::min(lo[p], row[p]);
      hi[p] = std::max(hi[p], row[p]);
    }
  }
  const auto normalized = NormalizeLosses(legal_payoffs);
  std::vector<double> dense(total * n, 1.0);
  for (size_t k = 0; k < legal_joints.size(); ++k) {
    std::copy(normalized[k].begin(), normalized[k].end(),
              dense.begin() + legal_joints[k] * n);
  }
  const StageGame stage = StageGame::Dense(action_counts, std::move(dense));

  StageSolution solution;
  solution.mask = legal;
  if (options.prune && total <= options.dense_cap) {
    solution.mask = PruneDominated(stage, legal).mask;
  }
  solution.outcome =
      MaExpIx(stage, options.rounds,
              DefaultStageParams(solution.mask, options.rounds), solution.mask,
              rng);
  solution.values.resize(n);
  for (int p = 0; p < n; ++p) {
    const double range = hi[p] > lo[p] ? hi[p] - lo[p] : 0.0;
    solution.values[p] = lo[p] + range * solution.outcome.values[p];
  }
  solution.policies = solution.outcome.policies;
  if (options.verify && total <= options.dense_cap) {
    solution.epsilon =
        VerifyCce(EmpiricalToDistribution(solution.outcome), stage, legal);
  }
  return solution;
}

}  // namespace nncce
