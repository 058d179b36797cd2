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

#ifndef NNCCE_APPROX_H_
#define NNCCE_APPROX_H_

// Fully connected networks trained with Adam on cross-entropy targets, the
// categorical value codec, exact tabular value tables and the checkpoint
// format.
//
// A network is a stack of affine layers. Every layer except the last applies
// ReLU followed by dropout. An optional side input is concatenated to the
// activations entering layer `side_layer`; the value networks use it to feed
// joint-action one-hots next to the learned state representation. The output
// is always a softmax: a distribution over value bins for the regression
// head, over actions for the policy head.

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "nncce/games.h"
#include "nncce/util.h"

namespace nncce {

enum class HeadKind : uint8_t { kRegressionSupport = 0, kPolicySoftmax = 1 };

struct MlpConfig {
  // layer_dims[0] is the observation size, layer_dims.back() the output size.
  std::vector<int> layer_dims;
  HeadKind head_kind = HeadKind::kPolicySoftmax;
  // Input of layer `side_layer` is [activations; side input]. Ignored when
  // side_size == 0.
  int side_layer = 0;
  int side_size = 0;
  double dropout_rate = 0.0;
  double l2_coeff = 0.0;
  double learning_rate = 1e-3;

  void Validate() const;
  int LayerInputSize(int layer) const;
};

class SupportCodec {
 public:
  SupportCodec(int num_bins = 21, double lo = 0.0, double hi = 1.0);

  int num_bins() const { return num_bins_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double Center(int k) const;

  // Two-hot encoding of clamp(v, lo, hi).
  std::vector<double> ScalarToSupport(double v) const;
  double SupportToScalar(std::span<const double> p) const;

 private:
  int num_bins_;
  double lo_;
  double hi_;
};

// One minibatch, one example per column.
template <typename Scalar>
struct Batch {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix input;
  Matrix side;
  Matrix target;
};

template <typename Scalar>
class BasicMlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Layer {
    Matrix weight;  // out x in
    Vector bias;
  };

  BasicMlp() = default;
  // He-uniform initialization from `seed`.
  BasicMlp(const MlpConfig& config, uint64_t seed);

  const MlpConfig& config() const { return config_; }
  MlpConfig& mutable_config() { return config_; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }
  int input_size() const { return config_.layer_dims.front(); }
  int output_size() const { return config_.layer_dims.back(); }

  // Softmax output. `rng` is only used when train_mode is set.
  std::vector<double> Forward(std::span<const double> input,
                              std::span<const double> side = {},
                              bool train_mode = false,
                              Rng* rng = nullptr) const;
  std::vector<double> Logits(std::span<const double> input,
                             std::span<const double> side = {},
                             bool train_mode = false,
                             Rng* rng = nullptr) const;
  Matrix ForwardBatch(const Matrix& input, const Matrix& side) const;
  // Softmax outputs for one input paired with each column of `sides`; the
  // layers below the side input are evaluated once.
  Matrix ForwardSides(std::span<const double> input, const Matrix& sides) const;

  // Mean cross-entropy over the batch plus l2 * sum ||W||^2. Fills `grads`
  // (same shapes as layers()) when non-null.
  Scalar Loss(const Batch<Scalar>& batch, bool train_mode, Rng* rng,
              std::vector<Layer>* grads) const;
  Scalar L2Penalty() const;

  // One Adam step on the given gradients.
  void AdamStep(const std::vector<Layer>& grads);
  void ResetOptimizer();

  bool AllFinite() const;

 private:
  Matrix Propagate(const Matrix& input, const Matrix& side, bool train_mode,
                   Rng* rng, std::vector<Matrix>* inputs,
                   std::vector<Matrix>* pre) const;
  void CheckInput(int64_t input_rows, int64_t side_rows) const;

  MlpConfig config_;
  std::vector<Layer> layers_;
  std::vector<Layer> adam_m_;
  std::vector<Layer> adam_v_;
  int64_t adam_steps_ = 0;
};

using MlpModel = BasicMlp<float>;

struct RegressionExample {
  std::vector<double> input;
  std::vector<double> side;
  double target = 0.0;
};

struct PolicyExample {
  std::vector<double> input;
  std::vector<double> side;
  std::vector<double> target;
};

struct TrainOptions {
  int epochs = 10;
  int batch_size = 64;
  uint64_t seed = 0;
};

// Per-epoch mean training loss; the last entry is the final loss.
using LossCurve = std::vector<double>;

// Cross-entropy against the two-hot target plus L2, Adam updates. Throws
// RuntimeFailure on a non-finite loss.
template <typename Scalar>
LossCurve TrainRegression(BasicMlp<Scalar>& model,
                          const std::vector<RegressionExample>& data,
                          const SupportCodec& codec,
                          const TrainOptions& options);

// Cross-entropy against soft targets plus L2. Targets must sum to 1.
template <typename Scalar>
LossCurve TrainPolicy(BasicMlp<Scalar>& model,
                      const std::vector<PolicyExample>& data,
                      const TrainOptions& options);

template <typename Scalar>
double PredictScalar(const BasicMlp<Scalar>& model, const SupportCodec& codec,
                     std::span<const double> input,
                     std::span<const double> side = {});

// -- Tabular oracle ----------------------------------------------------------

struct TabularKey {
  GameState state;
  int64_t joint_index = 0;
  bool operator==(const TabularKey& other) const {
    return joint_index == other.joint_index && state == other.state;
  }
};

struct TabularKeyHash {
  size_t operator()(const TabularKey& key) const;
};

struct TabularRecord {
  GameState state;
  int64_t joint_index = 0;
  std::vector<double> value;
};

class TabularQ {
 public:
  explicit TabularQ(std::vector<double> default_value = {})
      : default_value_(std::move(default_value)) {}

  const std::vector<double>& Lookup(const GameState& state,
                                    int64_t joint_index) const;
  bool Contains(const GameState& state, int64_t joint_index) const;
  size_t size() const { return table_.size(); }
  void Set(const GameState& state, int64_t joint_index,
           std::vector<double> value);

 private:
  std::vector<double> default_value_;
  std::unordered_map<TabularKey, std::vector<double>, TabularKeyHash> table_;
};

// Value per key is the mean of its records.
TabularQ FitTabular(const std::vector<TabularRecord>& records,
                    std::vector<double> default_value);

// -- Checkpoints -------------------------------------------------------------

struct CheckpointMeta {
  std::string game_id;
  int player = 0;
  // -1 for policy networks.
  int timestep = -1;
  SupportCodec codec;
};

// Binary "CCEF" file, written atomically.
void SaveCheckpoint(const std::string& path, const MlpModel& model,
                    const CheckpointMeta& meta);
MlpModel LoadCheckpoint(const std::string& path, CheckpointMeta* meta);

std::string SerializeCheckpoint(const MlpModel& model,
                                const CheckpointMeta& meta);
MlpModel DeserializeCheckpoint(const std::string& bytes, CheckpointMeta* meta);

}  // namespace nncce

#endif  // NNCCE_APPROX_H_
