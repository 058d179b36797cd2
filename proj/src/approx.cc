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

#include "nncce/approx.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

namespace nncce {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void MlpConfig::Validate() const {
  if (layer_dims.size() < 2) {
    throw ContractViolation("MlpConfig: need at least input and output dims");
  }
  for (int d : layer_dims) {
    if (d < 1) throw ContractViolation(StrCat("MlpConfig: bad layer dim ", d));
  }
  if (side_size < 0 ||
      (side_size > 0 &&
       (side_layer < 0 || side_layer >= static_cast<int>(layer_dims.size()) - 1))) {
    throw ContractViolation(StrCat("MlpConfig: side input at layer ", side_layer,
                                   " of size ", side_size, " is invalid"));
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ContractViolation(StrCat("MlpConfig: dropout ", dropout_rate));
  }
  if (!(l2_coeff >= 0.0)) {
    throw ContractViolation(StrCat("MlpConfig: l2 ", l2_coeff));
  }
  if (!(learning_rate > 0.0)) {
    throw ContractViolation(StrCat("MlpConfig: learning rate ", learning_rate));
  }
}

int MlpConfig::LayerInputSize(int layer) const {
  return layer_dims[layer] + (side_size > 0 && layer == side_layer ? side_size : 0);
}

// -- SupportCodec -------------------------------------------------------------

SupportCodec::SupportCodec(int num_bins, double lo, double hi)
    : num_bins_(num_bins), lo_(lo), hi_(hi) {
  if (num_bins < 2) {
    throw ContractViolation(StrCat("SupportCodec: need >= 2 bins, got ", num_bins));
  }
  if (!(lo < hi)) {
    throw ContractViolation(StrCat("SupportCodec: need lo < hi, got [", lo, ", ", hi, "]"));
  }
}

double SupportCodec::Center(int k) const {
  return lo_ + (hi_ - lo_) * k / (num_bins_ - 1);
}

std::vector<double> SupportCodec::ScalarToSupport(double v) const {
  std::vector<double> p(num_bins_, 0.0);
  const double x = (std::clamp(v, lo_, hi_) - lo_) / (hi_ - lo_) * (num_bins_ - 1);
  const int k = std::min(static_cast<int>(std::floor(x)), num_bins_ - 2);
  const double frac = x - k;
  p[k] = 1.0 - frac;
  p[k + 1] = frac;
  return p;
}

double SupportCodec::SupportToScalar(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != num_bins_) {
    throw ContractViolation(StrCat("SupportToScalar: expected ", num_bins_,
                                   " entries, got ", p.size()));
  }
  double v = 0.0;
  for (int k = 0; k < num_bins_; ++k) v += p[k] * Center(k);
  return v;
}

// -- BasicMlp -------------------------------------------------------------------

namespace {

template <typename Matrix>
Matrix ColumnSoftmax(const Matrix& logits) {
  Matrix out = logits;
  for (int64_t c = 0; c < out.cols(); ++c) {
    auto col = out.col(c);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
  return out;
}

template <typename Matrix>
Matrix ColumnLogSoftmax(const Matrix& logits) {
  Matrix out = logits;
  for (int64_t c = 0; c < out.cols(); ++c) {
    auto col = out.col(c);
    const auto top = col.maxCoeff();
    col.array() -= top;
    const auto log_total = std::log(col.array().exp().sum());
    col.array() -= log_total;
  }
  return out;
}

template <typename Scalar>
typename BasicMlp<Scalar>::Matrix ToColumn(std::span<const double> values) {
  typename BasicMlp<Scalar>::Matrix m(values.size(), 1);
  for (size_t i = 0; i < values.size(); ++i) m(i, 0) = static_cast<Scalar>(values[i]);
  return m;
}

}  // namespace

template <typename Scalar>
BasicMlp<Scalar>::BasicMlp(const MlpConfig& config, uint64_t seed)
    : config_(config) {
  config_.Validate();
  Rng rng(seed);
  const int num = static_cast<int>(config_.layer_dims.size()) - 1;
  layers_.resize(num);
  for (int l = 0; l < num; ++l) {
    const int fan_in = config_.LayerInputSize(l);
    const int fan_out = config_.layer_dims[l + 1];
    const double limit = std::sqrt(6.0 / fan_in);
    layers_[l].weight.resize(fan_out, fan_in);
    for (int64_t i = 0; i < layers_[l].weight.size(); ++i) {
      layers_[l].weight.data()[i] =
          static_cast<Scalar>(limit * (2.0 * Uniform01(rng) - 1.0));
    }
    layers_[l].bias = Vector::Zero(fan_out);
  }
  ResetOptimizer();
}

template <typename Scalar>
void BasicMlp<Scalar>::ResetOptimizer() {
  adam_m_.resize(layers_.size());
  adam_v_.resize(layers_.size());
  for (size_t l = 0; l < layers_.size(); ++l) {
    adam_m_[l].weight = Matrix::Zero(layers_[l].weight.rows(), layers_[l].weight.cols());
    adam_m_[l].bias = Vector::Zero(layers_[l].bias.size());
    adam_v_[l] = adam_m_[l];
  }
  adam_steps_ = 0;
}

template <typename Scalar>
void BasicMlp<Scalar>::CheckInput(int64_t input_rows, int64_t side_rows) const {
  if (input_rows != input_size()) {
    throw ContractViolation(StrCat("Mlp: input has ", input_rows,
                                   " entries, expected ", input_size()));
  }
  if (side_rows != config_.side_size) {
    throw ContractViolation(StrCat("Mlp: side input has ", side_rows,
                                   " entries, expected ", config_.side_size));
  }
}

template <typename Scalar>
typename BasicMlp<Scalar>::Matrix BasicMlp<Scalar>::Propagate(
    const Matrix& input, const Matrix& side, bool train_mode, Rng* rng,
    std::vector<Matrix>* inputs, std::vector<Matrix>* pre) const {
  const int num = num_layers();
  const bool dropout = train_mode && config_.dropout_rate > 0.0;
  if (dropout && rng == nullptr) {
    throw ContractViolation("Mlp: train-mode dropout needs a random stream");
  }
  const Scalar keep_scale = static_cast<Scalar>(1.0 / (1.0 - config_.dropout_rate));
  Matrix x = input;
  for (int l = 0; l < num; ++l) {
    if (config_.side_size > 0 && l == config_.side_layer) {
      Matrix joined(x.rows() + side.rows(), x.cols());
      joined << x, side;
      x = std::move(joined);
    }
    Matrix z = layers_[l].weight * x;
    z.colwise() += layers_[l].bias;
    if (inputs != nullptr) (*inputs)[l] = x;
    if (l == num - 1) return z;
    if (pre != nullptr) (*pre)[l] = z;
    x = z.cwiseMax(Scalar(0));
    if (dropout) {
      for (int64_t i = 0; i < x.size(); ++i) {
        x.data()[i] *= Uniform01(*rng) < config_.dropout_rate ? Scalar(0) : keep_scale;
      }
      // Dropped units are marked inactive for the backward pass.
      if (pre != nullptr) {
        for (int64_t i = 0; i < x.size(); ++i) {
          if (x.data()[i] == Scalar(0)) (*pre)[l].data()[i] = Scalar(0);
        }
      }
    }
  }
  return x;
}

template <typename Scalar>
std::vector<double> BasicMlp<Scalar>::Logits(std::span<const double> input,
                                             std::span<const double> side,
                                             bool train_mode, Rng* rng) const {
  CheckInput(input.size(), side.size());
  const Matrix z = Propagate(ToColumn<Scalar>(input), ToColumn<Scalar>(side),
                             train_mode, rng, nullptr, nullptr);
  return std::vector<double>(z.data(), z.data() + z.size());
}

template <typename Scalar>
std::vector<double> BasicMlp<Scalar>::Forward(std::span<const double> input,
                                              std::span<const double> side,
                                              bool train_mode, Rng* rng) const {
  CheckInput(input.size(), side.size());
  const Matrix p = ColumnSoftmax(Propagate(ToColumn<Scalar>(input),
                                           ToColumn<Scalar>(side), train_mode,
                                           rng, nullptr, nullptr));
  return std::vector<double>(p.data(), p.data() + p.size());
}

template <typename Scalar>
typename BasicMlp<Scalar>::Matrix BasicMlp<Scalar>::ForwardBatch(
    const Matrix& input, const Matrix& side) const {
  CheckInput(input.rows(), config_.side_size > 0 ? side.rows() : 0);
  return ColumnSoftmax(Propagate(input, side, false, nullptr, nullptr, nullptr));
}

template <typename Scalar>
typename BasicMlp<Scalar>::Matrix BasicMlp<Scalar>::ForwardSides(
    std::span<const double> input, const Matrix& sides) const {
  CheckInput(input.size(), sides.rows());
  if (config_.side_size == 0) {
    throw ContractViolation("Mlp: ForwardSides needs a side input");
  }
  Matrix x = ToColumn<Scalar>(input);
  for (int l = 0; l < config_.side_layer; ++l) {
    Matrix z = layers_[l].weight * x + layers_[l].bias;
    x = z.cwiseMax(Scalar(0));
  }
  Matrix joined(x.rows() + sides.rows(), sides.cols());
  joined.topRows(x.rows()) = x.replicate(1, sides.cols());
  joined.bottomRows(sides.rows()) = sides;
  x = std::move(joined);
  const int num = num_layers();
  for (int l = config_.side_layer; l < num; ++l) {
    Matrix z = layers_[l].weight * x;
    z.colwise() += layers_[l].bias;
    x = l == num - 1 ? std::move(z) : Matrix(z.cwiseMax(Scalar(0)));
  }
  return ColumnSoftmax(x);
}

template <typename Scalar>
Scalar BasicMlp<Scalar>::L2Penalty() const {
  Scalar total = 0;
  for (const Layer& layer : layers_) total += layer.weight.squaredNorm();
  return static_cast<Scalar>(config_.l2_coeff) * total;
}

template <typename Scalar>
Scalar BasicMlp<Scalar>::Loss(const Batch<Scalar>& batch, bool train_mode,
                              Rng* rng, std::vector<Layer>* grads) const {
  CheckInput(batch.input.rows(), config_.side_size > 0 ? batch.side.rows() : 0);
  const int num = num_layers();
  const int64_t n = batch.input.cols();
  std::vector<Matrix> inputs(num);
  std::vector<Matrix> pre(num);
  const Matrix logits = Propagate(batch.input, batch.side, train_mode, rng,
                                  &inputs, &pre);
  const Matrix log_p = ColumnLogSoftmax(logits);
  const Scalar data_loss = -(batch.target.array() * log_p.array()).sum() / n;
  if (grads == nullptr) return data_loss + L2Penalty();

  const bool dropout = train_mode && config_.dropout_rate > 0.0;
  const Scalar keep_scale = static_cast<Scalar>(1.0 / (1.0 - config_.dropout_rate));
  const Scalar l2 = static_cast<Scalar>(2.0 * config_.l2_coeff);
  grads->resize(num);
  Matrix delta = (log_p.array().exp().matrix() - batch.target) / Scalar(n);
  for (int l = num - 1; l >= 0; --l) {
    (*grads)[l].weight = delta * inputs[l].transpose() + l2 * layers_[l].weight;
    (*grads)[l].bias = delta.rowwise().sum();
    if (l == 0) break;
    Matrix back = layers_[l].weight.transpose() * delta;
    const int64_t rows = config_.layer_dims[l];
    delta = back.topRows(rows);
    const Matrix& z = pre[l - 1];
    for (int64_t i = 0; i < delta.size(); ++i) {
      if (z.data()[i] <= Scalar(0)) {
        delta.data()[i] = 0;
      } else if (dropout) {
        delta.data()[i] *= keep_scale;
      }
    }
  }
  return data_loss + L2Penalty();
}

template <typename Scalar>
void BasicMlp<Scalar>::AdamStep(const std::vector<Layer>& grads) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  ++adam_steps_;
  const Scalar b1 = kBeta1, b2 = kBeta2;
  const Scalar c1 = static_cast<Scalar>(1.0 - std::pow(kBeta1, adam_steps_));
  const Scalar c2 = static_cast<Scalar>(1.0 - std::pow(kBeta2, adam_steps_));
  const Scalar lr = static_cast<Scalar>(config_.learning_rate);
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) /
                     ((v.array() / c2).sqrt() + static_cast<Scalar>(kEps));
  };
  for (size_t l = 0; l < layers_.size(); ++l) {
    update(layers_[l].weight, adam_m_[l].weight, adam_v_[l].weight, grads[l].weight);
    update(layers_[l].bias, adam_m_[l].bias, adam_v_[l].bias, grads[l].bias);
  }
}

template <typename Scalar>
bool BasicMlp<Scalar>::AllFinite() const {
  for (const Layer& layer : layers_) {
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

template class BasicMlp<float>;
template class BasicMlp<double>;

// -- Training -------------------------------------------------------------------

namespace {

std::vector<int64_t> Permutation(int64_t n, Rng& rng) {
  std::vector<int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int64_t i = n - 1; i > 0; --i) {
    const int64_t j = static_cast<int64_t>(Uniform01(rng) * (i + 1));
    std::swap(order[i], order[j]);
  }
  return order;
}

// `fill(batch, column, example_index)` writes one example into the batch.
template <typename Scalar, typename Fill>
LossCurve RunTraining(BasicMlp<Scalar>& model, int64_t n, int target_rows,
                      const TrainOptions& options, const char* what, Fill fill) {
  if (n == 0) throw ContractViolation(StrCat(what, ": empty dataset"));
  if (options.epochs < 1 || options.batch_size < 1) {
    throw ContractViolation(StrCat(what, ": epochs and batch size must be >= 1"));
  }
  const MlpConfig& config = model.config();
  Rng order_rng(DeriveSeed(options.seed, 1));
  Rng dropout_rng(DeriveSeed(options.seed, 2));
  LossCurve curve;
  std::vector<typename BasicMlp<Scalar>::Layer> grads;
  Batch<Scalar> batch;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const auto order = Permutation(n, order_rng);
    double total = 0.0;
    for (int64_t start = 0; start < n; start += options.batch_size) {
      const int64_t size = std::min<int64_t>(options.batch_size, n - start);
      batch.input.resize(config.layer_dims.front(), size);
      batch.side.resize(config.side_size, size);
      batch.target.resize(target_rows, size);
      for (int64_t c = 0; c < size; ++c) fill(batch, c, order[start + c]);
      const Scalar loss = model.Loss(batch, true, &dropout_rng, &grads);
      if (!std::isfinite(static_cast<double>(loss))) {
        throw RuntimeFailure(StrCat(what, ": non-finite loss ", loss, " at epoch ",
                                    epoch, ", batch starting at example ", start));
      }
      model.AdamStep(grads);
      if (!model.AllFinite()) {
        throw RuntimeFailure(StrCat(what, ": non-finite parameters after epoch ",
                                    epoch, ", batch starting at example ", start));
      }
      total += static_cast<double>(loss) * size;
    }
    curve.push_back(total / n);
  }
  return curve;
}

template <typename Matrix>
void CopyColumn(Matrix& m, int64_t col, const std::vector<double>& values,
                const char* what) {
  if (static_cast<int64_t>(values.size()) != m.rows()) {
    throw ContractViolation(StrCat(what, ": example has ", values.size(),
                                   " entries, expected ", m.rows()));
  }
  for (int64_t r = 0; r < m.rows(); ++r) {
    m(r, col) = static_cast<typename Matrix::Scalar>(values[r]);
  }
}

}  // namespace

template <typename Scalar>
LossCurve TrainRegression(BasicMlp<Scalar>& model,
                          const std::vector<RegressionExample>& data,
                          const SupportCodec& codec,
                          const TrainOptions& options) {
  if (model.output_size() != codec.num_bins()) {
    throw ContractViolation(StrCat("TrainRegression: model outputs ",
                                   model.output_size(), " bins, codec has ",
                                   codec.num_bins()));
  }
  std::vector<std::vector<double>> targets;
  targets.reserve(data.size());
  for (const auto& ex : data) targets.push_back(codec.ScalarToSupport(ex.target));
  return RunTraining(model, data.size(), codec.num_bins(), options,
                     "TrainRegression", [&](Batch<Scalar>& b, int64_t c, int64_t i) {
                       CopyColumn(b.input, c, data[i].input, "TrainRegression");
                       CopyColumn(b.side, c, data[i].side, "TrainRegression");
                       CopyColumn(b.target, c, targets[i], "TrainRegression");
                     });
}

template <typename Scalar>
LossCurve TrainPolicy(BasicMlp<Scalar>& model,
                      const std::vector<PolicyExample>& data,
                      const TrainOptions& options) {
  for (size_t i = 0; i < data.size(); ++i) {
    const double total =
        std::accumulate(data[i].target.begin(), data[i].target.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-6) {
      throw ContractViolation(StrCat("TrainPolicy: target ", i, " sums to ", total));
    }
  }
  return RunTraining(model, data.size(), model.output_size(), options,
                     "TrainPolicy", [&](Batch<Scalar>& b, int64_t c, int64_t i) {
                       CopyColumn(b.input, c, data[i].input, "TrainPolicy");
                       CopyColumn(b.side, c, data[i].side, "TrainPolicy");
                       CopyColumn(b.target, c, data[i].target, "TrainPolicy");
                     });
}

template <typename Scalar>
double PredictScalar(const BasicMlp<Scalar>& model, const SupportCodec& codec,
                     std::span<const double> input,
                     std::span<const double> side) {
  return codec.SupportToScalar(model.Forward(input, side));
}

template LossCurve TrainRegression(BasicMlp<float>&,
                                   const std::vector<RegressionExample>&,
                                   const SupportCodec&, const TrainOptions&);
template LossCurve TrainRegression(BasicMlp<double>&,
                                   const std::vector<RegressionExample>&,
                                   const SupportCodec&, const TrainOptions&);
template LossCurve TrainPolicy(BasicMlp<float>&, const std::vector<PolicyExample>&,
                               const TrainOptions&);
template LossCurve TrainPolicy(BasicMlp<double>&, const std::vector<PolicyExample>&,
                               const TrainOptions&);
template double PredictScalar(const BasicMlp<float>&, const SupportCodec&,
                              std::span<const double>, std::span<const double>);
template double PredictScalar(const BasicMlp<double>&, const SupportCodec&,
                              std::span<const double>, std::span<const double>);

// -- TabularQ -------------------------------------------------------------------

size_t TabularKeyHash::operator()(const TabularKey& key) const {
  return static_cast<size_t>(
      Mix64(GameStateHash()(key.state) ^ Mix64(static_cast<uint64_t>(key.joint_index))));
}

const std::vector<double>& TabularQ::Lookup(const GameState& state,
                                            int64_t joint_index) const {
  const auto it = table_.find(TabularKey{state, joint_index});
  return it == table_.end() ? default_value_ : it->second;
}

bool TabularQ::Contains(const GameState& state, int64_t joint_index) const {
  return table_.count(TabularKey{state, joint_index}) > 0;
}

void TabularQ::Set(const GameState& state, int64_t joint_index,
                   std::vector<double> value) {
  table_[TabularKey{state, joint_index}] = std::move(value);
}

TabularQ FitTabular(const std::vector<TabularRecord>& records,
                    std::vector<double> default_value) {
  std::unordered_map<TabularKey, std::pair<std::vector<double>, int>, TabularKeyHash>
      sums;
  for (const auto& r : records) {
    auto& [sum, count] = sums[TabularKey{r.state, r.joint_index}];
    if (sum.empty()) sum.assign(r.value.size(), 0.0);
    if (sum.size() != r.value.size()) {
      throw ContractViolation("FitTabular: inconsistent value vector sizes");
    }
    for (size_t i = 0; i < sum.size(); ++i) sum[i] += r.value[i];
    ++count;
  }
  TabularQ table(std::move(default_value));
  for (auto& [key, entry] : sums) {
    for (double& v : entry.first) v /= entry.second;
    table.Set(key.state, key.joint_index, std::move(entry.first));
  }
  return table;
}

// -- Checkpoints ----------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'C', 'C', 'E', 'F'};
constexpr uint16_t kVersion = 1;

class Writer {
 public:
  template <typename T>
  void Put(T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out_.append(bytes, sizeof(T));
  }
  void PutString(const std::string& s) {
    Put<uint32_t>(s.size());
    out_ += s;
  }
  void PutRaw(const char* data, size_t n) { out_.append(data, n); }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  template <typename T>
  T Get() {
    Need(sizeof(T));
    T value;
    std::memcpy(&value, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string GetString() {
    const uint32_t n = Get<uint32_t>();
    Need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void GetRaw(char* out, size_t n) {
    Need(n);
    std::memcpy(out, in_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void Need(size_t n) const {
    if (in_.size() - pos_ < n) throw RuntimeFailure("checkpoint: truncated file");
  }
  const std::string& in_;
  size_t pos_ = 0;
};

}  // namespace

std::string SerializeCheckpoint(const MlpModel& model, const CheckpointMeta& meta) {
  const MlpConfig& c = model.config();
  Writer w;
  w.PutRaw(kMagic, 4);
  w.Put<uint16_t>(kVersion);
  w.PutString(meta.game_id);
  w.Put<int32_t>(meta.player);
  w.Put<int32_t>(meta.timestep);
  w.Put<uint8_t>(static_cast<uint8_t>(c.head_kind));
  w.Put<uint32_t>(c.layer_dims.size());
  for (int d : c.layer_dims) w.Put<int32_t>(d);
  w.Put<int32_t>(c.side_layer);
  w.Put<int32_t>(c.side_size);
  w.Put<double>(c.dropout_rate);
  w.Put<double>(c.l2_coeff);
  w.Put<double>(c.learning_rate);
  w.Put<int32_t>(meta.codec.num_bins());
  w.Put<double>(meta.codec.lo());
  w.Put<double>(meta.codec.hi());
  for (const auto& layer : model.layers()) {
    // Row-major weights, then biases.
    for (int64_t r = 0; r < layer.weight.rows(); ++r) {
      for (int64_t col = 0; col < layer.weight.cols(); ++col) {
        w.Put<float>(layer.weight(r, col));
      }
    }
    for (int64_t r = 0; r < layer.bias.size(); ++r) w.Put<float>(layer.bias(r));
  }
  return std::move(w.str());
}

MlpModel DeserializeCheckpoint(const std::string& bytes, CheckpointMeta* meta) {
  Reader r(bytes);
  char magic[4];
  r.GetRaw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw RuntimeFailure("checkpoint: bad magic, not a CCEF file");
  }
  const uint16_t version = r.Get<uint16_t>();
  if (version != kVersion) {
    throw RuntimeFailure(StrCat("checkpoint: unsupported version ", version));
  }
  CheckpointMeta m;
  m.game_id = r.GetString();
  m.player = r.Get<int32_t>();
  m.timestep = r.Get<int32_t>();
  MlpConfig c;
  c.head_kind = static_cast<HeadKind>(r.Get<uint8_t>());
  const uint32_t ndims = r.Get<uint32_t>();
  if (ndims > 64) throw RuntimeFailure("checkpoint: implausible layer count");
  for (uint32_t i = 0; i < ndims; ++i) c.layer_dims.push_back(r.Get<int32_t>());
  c.side_layer = r.Get<int32_t>();
  c.side_size = r.Get<int32_t>();
  c.dropout_rate = r.Get<double>();
  c.l2_coeff = r.Get<double>();
  c.learning_rate = r.Get<double>();
  const int bins = r.Get<int32_t>();
  const double lo = r.Get<double>();
  const double hi = r.Get<double>();
  try {
    c.Validate();
    m.codec = SupportCodec(bins, lo, hi);
  } catch (const ContractViolation& e) {
    throw RuntimeFailure(StrCat("checkpoint: invalid metadata: ", e.what()));
  }
  MlpModel model(c, 0);
  for (auto& layer : model.mutable_layers()) {
    for (int64_t row = 0; row < layer.weight.rows(); ++row) {
      for (int64_t col = 0; col < layer.weight.cols(); ++col) {
        layer.weight(row, col) = r.Get<float>();
      }
    }
    for (int64_t row = 0; row < layer.bias.size(); ++row) layer.bias(row) = r.Get<float>();
  }
  if (!r.done()) throw RuntimeFailure("checkpoint: trailing bytes");
  if (meta != nullptr) *meta = m;
  return model;
}

void SaveCheckpoint(const std::string& path, const MlpModel& model,
                    const CheckpointMeta& meta) {
  WriteFileAtomic(path, SerializeCheckpoint(model, meta));
}

MlpModel LoadCheckpoint(const std::string& path, CheckpointMeta* meta) {
  try {
    return DeserializeCheckpoint(ReadFile(path), meta);
  } catch (const RuntimeFailure& e) {
    throw RuntimeFailure(StrCat(path, ": ", e.what()));
  }
}

}  // namespace nncce
