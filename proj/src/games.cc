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

#include "nncce/games.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

namespace nncce {

size_t GameStateHash::operator()(const GameState& state) const {
  uint64_t h = Mix64(static_cast<uint64_t>(state.timestep));
  for (int32_t v : state.payload) {
    h = Mix64(h ^ static_cast<uint32_t>(v));
  }
  return static_cast<size_t>(h);
}

void GameSpec::Validate() const {
  if (num_players < 2) throw ContractViolation("game needs at least 2 players");
  if (horizon < 1) throw ContractViolation("horizon must be >= 1");
  if (static_cast<int>(action_counts.size()) != num_players) {
    throw ContractViolation(StrCat("action_counts has ", action_counts.size(),
                                   " entries, expected ", num_players));
  }
  for (int a : action_counts) {
    if (a < 1) throw ContractViolation("every action count must be >= 1");
  }
  if (start_distribution.empty()) {
    throw ContractViolation("start distribution is empty");
  }
  double total = 0.0;
  for (const auto& [state, p] : start_distribution) {
    if (p < 0.0) throw ContractViolation("negative start probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ContractViolation(
        StrCat("start distribution sums to ", total, ", expected 1"));
  }
  if (static_cast<int>(return_lo.size()) != num_players ||
      static_cast<int>(return_hi.size()) != num_players) {
    throw ContractViolation("return bounds must have one entry per player");
  }
}

// -- Joint action indexing --------------------------------------------------

int64_t NumJointActions(std::span<const int> action_counts) {
  int64_t n = 1;
  for (int a : action_counts) n *= a;
  return n;
}

int64_t JointActionIndex(std::span<const int> action_counts,
                         const JointAction& joint) {
  int64_t index = 0;
  for (size_t i = 0; i < action_counts.size(); ++i) {
    index = index * action_counts[i] + joint[i];
  }
  return index;
}

JointAction JointActionFromIndex(std::span<const int> action_counts,
                                 int64_t index) {
  JointAction joint(action_counts.size());
  for (int i = static_cast<int>(action_counts.size()) - 1; i >= 0; --i) {
    joint[i] = static_cast<int>(index % action_counts[i]);
    index /= action_counts[i];
  }
  return joint;
}

// -- Game -------------------------------------------------------------------

Game::Game(GameSpec spec) : spec_(std::move(spec)) {
  if (spec_.sides.empty()) {
    for (int p = 0; p < spec_.num_players; ++p) spec_.sides.push_back({p});
  }
  spec_.Validate();
}

GameState Game::SampleStart(Rng& rng) const {
  if (spec_.start_distribution.size() == 1) {
    return spec_.start_distribution.front().first;
  }
  std::vector<double> probs;
  probs.reserve(spec_.start_distribution.size());
  for (const auto& entry : spec_.start_distribution) {
    probs.push_back(entry.second);
  }
  return spec_.start_distribution[SampleCategorical(probs, rng)].first;
}

StepResult Game::Step(const GameState& state, const JointAction& joint) const {
  if (state.terminal) {
    throw ContractViolation("Step called on a terminal state");
  }
  if (static_cast<int>(joint.size()) != spec_.num_players) {
    throw ContractViolation(StrCat("joint action has ", joint.size(),
                                   " entries, expected ", spec_.num_players));
  }
  for (int p = 0; p < spec_.num_players; ++p) {
    if (!IsLegal(state, p, joint[p])) {
      throw ContractViolation(StrCat("illegal action ", joint[p],
                                     " for player ", p, " in ", spec_.id));
    }
  }
  return DoStep(state, joint);
}

std::vector<int> Game::LegalActions(const GameState& state, int player) const {
  if (state.terminal) {
    throw ContractViolation("LegalActions called on a terminal state");
  }
  if (player < 0 || player >= spec_.num_players) {
    throw ContractViolation(StrCat("player ", player, " out of range"));
  }
  return DoLegalActions(state, player);
}

bool Game::IsLegal(const GameState& state, int player, int action) const {
  if (action < 0 || action >= spec_.action_counts[player]) return false;
  const std::vector<int> legal = DoLegalActions(state, player);
  return std::find(legal.begin(), legal.end(), action) != legal.end();
}

std::vector<int> Game::DoLegalActions(const GameState&, int player) const {
  std::vector<int> all(spec_.action_counts[player]);
  std::iota(all.begin(), all.end(), 0);
  return all;
}

std::string Game::StateToString(const GameState& state) const {
  std::ostringstream out;
  out << "t=" << state.timestep << " [";
  for (size_t i = 0; i < state.payload.size(); ++i) {
    out << (i ? "," : "") << state.payload[i];
  }
  out << "]";
  return out.str();
}

// -- MatrixGame -------------------------------------------------------------

namespace {

GameKind DetectKind(const std::vector<std::vector<double>>& payoffs,
                    int num_players) {
  bool zero_sum = num_players == 2;
  bool identical = true;
  for (const auto& row : payoffs) {
    if (zero_sum && std::abs(row[0] + row[1]) > 1e-12) zero_sum = false;
    for (int p = 1; p < num_players; ++p) {
      if (row[p] != row[0]) identical = false;
    }
  }
  if (zero_sum) return GameKind::kZeroSum;
  if (identical) return GameKind::kIdenticalInterest;
  return GameKind::kGeneralSum;
}

GameSpec MatrixSpec(std::string id, std::vector<int> action_counts,
                    const std::vector<std::vector<double>>& payoffs,
                    int rounds) {
  GameSpec spec;
  spec.id = std::move(id);
  spec.num_players = static_cast<int>(action_counts.size());
  spec.horizon = rounds;
  spec.action_counts = std::move(action_counts);
  GameState start;
  start.timestep = 0;
  if (rounds > 1) start.payload = {-1};
  spec.start_distribution = {{start, 1.0}};
  if (static_cast<int64_t>(payoffs.size()) !=
      NumJointActions(spec.action_counts)) {
    throw ContractViolation(StrCat("matrix game expects ",
                                   NumJointActions(spec.action_counts),
                                   " payoff rows, got ", payoffs.size()));
  }
  spec.kind = DetectKind(payoffs, spec.num_players);
  spec.return_lo.assign(spec.num_players, 0.0);
  spec.return_hi.assign(spec.num_players, 0.0);
  for (int p = 0; p < spec.num_players; ++p) {
    double lo = payoffs[0][p];
    double hi = payoffs[0][p];
    for (const auto& row : payoffs) {
      if (static_cast<int>(row.size()) != spec.num_players) {
        throw ContractViolation("payoff row has the wrong number of entries");
      }
      if (!std::isfinite(row[p])) {
        throw ContractViolation("matrix payoffs must be finite");
      }
      lo = std::min(lo, row[p]);
      hi = std::max(hi, row[p]);
    }
    spec.return_lo[p] = lo * rounds;
    spec.return_hi[p] = hi * rounds;
  }
  return spec;
}

}  // namespace

MatrixGame::MatrixGame(std::string id, std::vector<int> action_counts,
                       std::vector<std::vector<double>> payoffs)
    : Game(MatrixSpec(std::move(id), std::move(action_counts), payoffs, 1)),
      payoffs_(std::move(payoffs)) {}

const std::vector<double>& MatrixGame::Payoff(const JointAction& joint) const {
  return payoffs_[JointActionIndex(spec_.action_counts, joint)];
}

std::vector<double> MatrixGame::Observe(const GameState& state, int) const {
  return {static_cast<double>(state.timestep)};
}

StepResult MatrixGame::DoStep(const GameState& state,
                              const JointAction& joint) const {
  StepResult result;
  result.next_state = state;
  result.next_state.payload = {
      static_cast<int32_t>(JointActionIndex(spec_.action_counts, joint))};
  result.next_state.timestep = state.timestep + 1;
  result.next_state.terminal = true;
  result.rewards = Payoff(joint);
  return result;
}

std::shared_ptr<MatrixGame> ParseMatrixGame(const std::string& text,
                                            const std::string& id) {
  std::string stripped;
  for (const auto& line : Split(text, '\n')) {
    stripped += line.substr(0, line.find('#'));
    stripped += '\n';
  }
  std::istringstream in(stripped);
  int num_players = 0;
  if (!(in >> num_players) || num_players < 2) {
    throw ContractViolation("matrix file: first token must be N >= 2");
  }
  std::vector<int> counts(num_players);
  for (int& a : counts) {
    if (!(in >> a) || a < 1) {
      throw ContractViolation("matrix file: bad action count");
    }
  }
  const int64_t rows = NumJointActions(counts);
  std::vector<std::vector<double>> payoffs(rows,
                                           std::vector<double>(num_players));
  for (auto& row : payoffs) {
    for (double& v : row) {
      if (!(in >> v)) {
        throw ContractViolation(
            StrCat("matrix file: expected ", rows * num_players, " payoffs"));
      }
    }
  }
  std::string extra;
  if (in >> extra) {
    throw ContractViolation(StrCat("matrix file: unexpected token '", extra,
                                   "' after ", rows * num_players, " payoffs"));
  }
  return std::make_shared<MatrixGame>(id, counts, std::move(payoffs));
}

std::shared_ptr<MatrixGame> LoadMatrixGame(const std::string& path) {
  return ParseMatrixGame(ReadFile(path), "matrix:" + path);
}

std::shared_ptr<MatrixGame> MatchingPennies() {
  return std::make_shared<MatrixGame>(
      "matrix:matching_pennies", std::vector<int>{2, 2},
      std::vector<std::vector<double>>{{1, -1}, {-1, 1}, {-1, 1}, {1, -1}});
}

std::shared_ptr<MatrixGame> RockPaperScissors() {
  // rock, paper, scissors
  std::vector<std::vector<double>> payoffs;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const int d = (a - b + 3) % 3;
      const double r = d == 0 ? 0.0 : (d == 1 ? 1.0 : -1.0);
      payoffs.push_back({r, -r});
    }
  }
  return std::make_shared<MatrixGame>("matrix:rps", std::vector<int>{3, 3},
                                      std::move(payoffs));
}

std::shared_ptr<MatrixGame> PrisonersDilemma() {
  return std::make_shared<MatrixGame>(
      "matrix:prisoners_dilemma", std::vector<int>{2, 2},
      std::vector<std::vector<double>>{{3, 3}, {0, 5}, {5, 0}, {1, 1}});
}

// -- RepeatedMatrixGame -----------------------------------------------------

RepeatedMatrixGame::RepeatedMatrixGame(std::shared_ptr<const MatrixGame> stage,
                                       int rounds)
    : Game(MatrixSpec(StrCat("repeated:", rounds, ":",
                             stage->spec().id.substr(
                                 stage->spec().id.find(':') + 1)),
                      stage->spec().action_counts, stage->payoffs(), rounds)),
      stage_(std::move(stage)) {}

int RepeatedMatrixGame::ObservationSize() const {
  return static_cast<int>(NumJointActions(spec_.action_counts)) + 1;
}

std::vector<double> RepeatedMatrixGame::Observe(const GameState& state,
                                                int) const {
  std::vector<double> obs(ObservationSize(), 0.0);
  if (!state.payload.empty() && state.payload[0] >= 0) {
    obs[state.payload[0]] = 1.0;
  }
  obs.back() = static_cast<double>(state.timestep) / spec_.horizon;
  return obs;
}

StepResult RepeatedMatrixGame::DoStep(const GameState& state,
                                      const JointAction& joint) const {
  StepResult result;
  result.next_state.timestep = state.timestep + 1;
  result.next_state.payload = {
      static_cast<int32_t>(JointActionIndex(spec_.action_counts, joint))};
  result.next_state.terminal = result.next_state.timestep >= spec_.horizon;
  result.rewards = stage_->Payoff(joint);
  return result;
}

// -- ChainGame --------------------------------------------------------------

namespace {

GameSpec ChainSpec(int horizon, int num_actions, uint64_t seed) {
  if (horizon < 1 || num_actions < 1) {
    throw ContractViolation("chain game needs H >= 1 and A >= 1");
  }
  GameSpec spec;
  spec.id = StrCat("chain:", horizon, "x", num_actions, ":", seed);
  spec.num_players = 2;
  spec.horizon = horizon;
  spec.action_counts = {num_actions, num_actions};
  const int contexts = num_actions * num_actions;
  for (int c = 0; c < contexts; ++c) {
    GameState s;
    s.payload = {c};
    spec.start_distribution.push_back({s, 1.0 / contexts});
  }
  spec.kind = GameKind::kGeneralSum;
  spec.return_lo = {0.0, 0.0};
  spec.return_hi = {1.0, 1.0};
  return spec;
}

}  // namespace

ChainGame::ChainGame(int horizon, int num_actions, uint64_t seed)
    : Game(ChainSpec(horizon, num_actions, seed)),
      num_actions_(num_actions),
      seed_(seed) {}

double ChainGame::StageReward(int timestep, int context,
                              const JointAction& joint, int player) const {
  uint64_t h = DeriveSeed(seed_, static_cast<uint64_t>(timestep));
  h = Mix64(h ^ static_cast<uint64_t>(context));
  h = Mix64(h ^ static_cast<uint64_t>(JointActionIndex(spec_.action_counts,
                                                       joint)));
  h = Mix64(h ^ static_cast<uint64_t>(player + 1));
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return u / spec_.horizon;
}

std::vector<double> ChainGame::Observe(const GameState& state, int) const {
  std::vector<double> obs(ObservationSize(), 0.0);
  obs[state.payload[0]] = 1.0;
  obs.back() = static_cast<double>(state.timestep) / spec_.horizon;
  return obs;
}

StepResult ChainGame::DoStep(const GameState& state,
                             const JointAction& joint) const {
  StepResult result;
  result.rewards = {StageReward(state.timestep, state.payload[0], joint, 0),
                    StageReward(state.timestep, state.payload[0], joint, 1)};
  result.next_state.timestep = state.timestep + 1;
  result.next_state.payload = {
      static_cast<int32_t>(JointActionIndex(spec_.action_counts, joint))};
  result.next_state.terminal = result.next_state.timestep >= spec_.horizon;
  return result;
}

// -- Goofspiel --------------------------------------------------------------

namespace {

constexpr int kHand0 = 0;
constexpr int kHand1 = 1;
constexpr int kScore = 2;
constexpr int kOrder = 3;

GameSpec GoofspielSpec(int n, const std::optional<std::vector<int>>& fixed) {
  if (n < 1 || n > 16) throw ContractViolation("goofspiel needs 1 <= N <= 16");
  GameSpec spec;
  spec.id = StrCat("goofspiel:", n, fixed ? ":fixed" : "");
  spec.num_players = 2;
  spec.horizon = n;
  spec.action_counts = {n, n};
  const int32_t full = (1 << n) - 1;
  auto make_state = [&](const std::vector<int>& order) {
    GameState s;
    s.payload = {full, full, 0};
    for (int prize : order) s.payload.push_back(prize);
    return s;
  };
  if (fixed) {
    std::vector<int> sorted = *fixed;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(sorted.size()) != n || sorted[i] != i + 1) {
        throw ContractViolation("fixed prize order must permute 1..N");
      }
    }
    spec.start_distribution = {{make_state(*fixed), 1.0}};
  } else {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 1);
    std::vector<std::vector<int>> orders;
    do {
      orders.push_back(order);
    } while (std::next_permutation(order.begin(), order.end()));
    const double p = 1.0 / static_cast<double>(orders.size());
    for (const auto& o : orders) spec.start_distribution.push_back({make_state(o), p});
  }
  spec.kind = GameKind::kZeroSum;
  const double total = n * (n + 1) / 2.0;
  spec.return_lo = {-total, -total};
  spec.return_hi = {total, total};
  return spec;
}

}  // namespace

Goofspiel::Goofspiel(int num_cards, std::optional<std::vector<int>> fixed_order)
    : Game(GoofspielSpec(num_cards, fixed_order)), num_cards_(num_cards) {}

int Goofspiel::CurrentPrize(const GameState& state) const {
  if (state.timestep >= num_cards_) return 0;
  return state.payload[kOrder + state.timestep];
}

std::vector<int> Goofspiel::DoLegalActions(const GameState& state,
                                           int player) const {
  const int32_t hand = state.payload[player == 0 ? kHand0 : kHand1];
  std::vector<int> legal;
  for (int c = 0; c < num_cards_; ++c) {
    if (hand & (1 << c)) legal.push_back(c);
  }
  return legal;
}

StepResult Goofspiel::DoStep(const GameState& state,
                             const JointAction& joint) const {
  StepResult result;
  GameState& next = result.next_state;
  next = state;
  const int prize = CurrentPrize(state);
  const int bid0 = joint[0] + 1;
  const int bid1 = joint[1] + 1;
  next.payload[kHand0] &= ~(1 << joint[0]);
  next.payload[kHand1] &= ~(1 << joint[1]);
  double r0 = 0.0;
  if (bid0 > bid1) r0 = prize;
  if (bid1 > bid0) r0 = -prize;
  next.payload[kScore] += static_cast<int32_t>(r0);
  next.timestep = state.timestep + 1;
  next.terminal = next.timestep >= num_cards_;
  result.rewards = {r0, -r0};
  return result;
}

std::vector<double> Goofspiel::Observe(const GameState& state,
                                       int player) const {
  const int n = num_cards_;
  std::vector<double> obs(ObservationSize(), 0.0);
  const int32_t own = state.payload[player == 0 ? kHand0 : kHand1];
  const int32_t opp = state.payload[player == 0 ? kHand1 : kHand0];
  for (int c = 0; c < n; ++c) {
    obs[c] = (own >> c) & 1;
    obs[n + c] = (opp >> c) & 1;
  }
  for (int t = state.timestep; t < n; ++t) {
    obs[2 * n + state.payload[kOrder + t] - 1] = 1.0;
  }
  if (state.timestep < n) obs[3 * n + CurrentPrize(state) - 1] = 1.0;
  const double total = n * (n + 1) / 2.0;
  const double diff = state.payload[kScore] * (player == 0 ? 1.0 : -1.0);
  obs[4 * n] = diff / total;
  obs[4 * n + 1] = static_cast<double>(state.timestep) / n;
  return obs;
}

std::string Goofspiel::StateToString(const GameState& state) const {
  std::ostringstream out;
  out << "t=" << state.timestep << " hands=" << state.payload[kHand0] << "/"
      << state.payload[kHand1] << " score=" << state.payload[kScore]
      << " order=";
  for (int i = 0; i < num_cards_; ++i) out << state.payload[kOrder + i];
  return out.str();
}

// -- GridPursuit ------------------------------------------------------------

namespace {

GameSpec PursuitSpec(int width, int height, int horizon,
                     std::vector<std::pair<GameState, double>> spawns) {
  if (width < 1 || height < 1 || horizon < 1) {
    throw ContractViolation("pursuit needs positive grid size and horizon");
  }
  GameSpec spec;
  spec.id = StrCat("pursuit:", width, "x", height, ":", horizon);
  spec.num_players = 3;
  spec.horizon = horizon;
  spec.action_counts = {5, 5, 5};
  spec.start_distribution = std::move(spawns);
  spec.kind = GameKind::kGeneralSum;
  spec.return_lo = {0.0, 0.0, -static_cast<double>(horizon)};
  spec.return_hi = {static_cast<double>(horizon),
                    static_cast<double>(horizon), 0.0};
  spec.sides = {{0, 1}, {2}};
  return spec;
}

std::vector<std::pair<GameState, double>> DefaultSpawns(int w, int h) {
  return {
      {GridPursuit::MakeState(0, 0, w - 1, 0, w / 2, h - 1), 0.5},
      {GridPursuit::MakeState(0, h - 1, w - 1, h - 1, w / 2, 0), 0.5},
  };
}

}  // namespace

GridPursuit::GridPursuit(int width, int height, int horizon)
    : GridPursuit(width, height, horizon, DefaultSpawns(width, height)) {}

GridPursuit::GridPursuit(int width, int height, int horizon,
                         std::vector<std::pair<GameState, double>> spawns)
    : Game(PursuitSpec(width, height, horizon, std::move(spawns))),
      width_(width),
      height_(height) {}

GameState GridPursuit::MakeState(int x0, int y0, int x1, int y1, int x2,
                                 int y2, int timestep) {
  GameState s;
  s.payload = {x0, y0, x1, y1, x2, y2};
  s.timestep = timestep;
  return s;
}

StepResult GridPursuit::DoStep(const GameState& state,
                               const JointAction& joint) const {
  StepResult result;
  GameState& next = result.next_state;
  next = state;
  for (int p = 0; p < 3; ++p) {
    int x = state.payload[2 * p];
    int y = state.payload[2 * p + 1];
    switch (joint[p]) {
      case kUp: y = std::min(y + 1, height_ - 1); break;
      case kDown: y = std::max(y - 1, 0); break;
      case kLeft: x = std::max(x - 1, 0); break;
      case kRight: x = std::min(x + 1, width_ - 1); break;
      default: break;
    }
    next.payload[2 * p] = x;
    next.payload[2 * p + 1] = y;
  }
  const bool caught =
      (next.payload[0] == next.payload[4] && next.payload[1] == next.payload[5]) ||
      (next.payload[2] == next.payload[4] && next.payload[3] == next.payload[5]);
  result.rewards = caught ? std::vector<double>{1.0, 1.0, -1.0}
                          : std::vector<double>{0.0, 0.0, 0.0};
  next.timestep = state.timestep + 1;
  next.terminal = next.timestep >= spec_.horizon;
  return result;
}

std::vector<double> GridPursuit::Observe(const GameState& state, int) const {
  std::vector<double> obs(7);
  const double sx = width_ > 1 ? width_ - 1 : 1;
  const double sy = height_ > 1 ? height_ - 1 : 1;
  for (int p = 0; p < 3; ++p) {
    obs[2 * p] = state.payload[2 * p] / sx;
    obs[2 * p + 1] = state.payload[2 * p + 1] / sy;
  }
  obs[6] = static_cast<double>(state.timestep) / spec_.horizon;
  return obs;
}

std::string GridPursuit::StateToString(const GameState& state) const {
  return StrCat("t=", state.timestep, " P0=(", state.payload[0], ",",
                state.payload[1], ") P1=(", state.payload[2], ",",
                state.payload[3], ") E=(", state.payload[4], ",",
                state.payload[5], ")");
}

// -- Factory ----------------------------------------------------------------

namespace {

int ParseInt(const std::string& text, const std::string& id) {
  try {
    size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ContractViolation(StrCat("bad integer '", text, "' in game id ", id));
  }
}

std::pair<int, int> ParseDims(const std::string& text, const std::string& id) {
  const auto x = text.find('x');
  if (x == std::string::npos) {
    throw ContractViolation(StrCat("expected <a>x<b> in game id ", id));
  }
  return {ParseInt(text.substr(0, x), id), ParseInt(text.substr(x + 1), id)};
}

}  // namespace

GamePtr MakeGame(const std::string& id) {
  const auto colon = id.find(':');
  if (colon == std::string::npos) {
    throw ContractViolation(StrCat("game id '", id, "' has no ':'"));
  }
  const std::string kind = id.substr(0, colon);
  const std::string rest = id.substr(colon + 1);
  if (kind == "matrix") {
    if (rest == "matching_pennies") return MatchingPennies();
    if (rest == "rps") return RockPaperScissors();
    if (rest == "prisoners_dilemma") return PrisonersDilemma();
    return LoadMatrixGame(rest);
  }
  if (kind == "repeated") {
    const auto c2 = rest.find(':');
    if (c2 == std::string::npos) {
      throw ContractViolation("expected repeated:<rounds>:<file>");
    }
    const int rounds = ParseInt(rest.substr(0, c2), id);
    auto stage = std::static_pointer_cast<const MatrixGame>(
        MakeGame("matrix:" + rest.substr(c2 + 1)));
    return std::make_shared<RepeatedMatrixGame>(stage, rounds);
  }
  if (kind == "chain") {
    const auto parts = Split(rest, ':');
    const auto [h, a] = ParseDims(parts[0], id);
    const uint64_t seed = parts.size() > 1 ? ParseInt(parts[1], id) : 0;
    return std::make_shared<ChainGame>(h, a, seed);
  }
  if (kind == "goofspiel") {
    const auto parts = Split(rest, ':');
    const int n = ParseInt(parts[0], id);
    if (parts.size() > 1) {
      if (parts[1] != "fixed") {
        throw ContractViolation(StrCat("unknown goofspiel option in ", id));
      }
      std::vector<int> order(n);
      for (int i = 0; i < n; ++i) order[i] = n - i;
      return std::make_shared<Goofspiel>(n, order);
    }
    return std::make_shared<Goofspiel>(n);
  }
  if (kind == "pursuit") {
    const auto parts = Split(rest, ':');
    const auto [w, h] = ParseDims(parts[0], id);
    const int horizon = parts.size() > 1 ? ParseInt(parts[1], id) : 10;
    return std::make_shared<GridPursuit>(w, h, horizon);
  }
  throw ContractViolation(StrCat("unknown game kind '", kind, "'"));
}

}  // namespace nncce
