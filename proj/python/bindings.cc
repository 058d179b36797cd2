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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nncce/baseline.h"
#include "nncce/bandit.h"
#include "nncce/cce.h"
#include "nncce/cli.h"
#include "nncce/games.h"
#include "nncce/harness.h"
#include "nncce/trainer.h"

namespace py = pybind11;

namespace nncce {
namespace {

StageGame DenseStage(const std::vector<int>& counts,
                     const std::vector<std::vector<double>>& payoffs) {
  std::vector<double> flat;
  for (const auto& row : NormalizeLosses(payoffs)) flat.insert(flat.end(), row.begin(), row.end());
  return StageGame::Dense(counts, flat);
}

py::dict SolveMatrix(const std::vector<int>& counts,
                     const std::vector<std::vector<double>>& payoffs, int64_t rounds,
                     bool prune, uint64_t seed, bool verify) {
  StageSolveOptions options;
  options.rounds = rounds;
  options.prune = prune;
  options.verify = verify;
  Rng rng(seed);
  StageSolution s;
  {
    py::gil_scoped_release release;
    s = SolveStage(counts, FullMask(counts), payoffs, options, rng);
  }
  py::dict out;
  out["values"] = s.values;
  out["policies"] = s.policies;
  out["final_policies"] = s.outcome.final_policies;
  out["mask"] = s.mask;
  out["epsilon"] = s.epsilon;
  out["empirical_joint"] = s.outcome.empirical_joint;
  return out;
}

double VerifyMatrix(const std::vector<int>& counts,
                    const std::vector<std::vector<double>>& payoffs,
                    const std::vector<std::pair<std::vector<int>, double>>& dist) {
  JointDistribution joint(dist.begin(), dist.end());
  return VerifyCce(joint, DenseStage(counts, payoffs));
}

Config ConfigFrom(const std::string& text, const py::kwargs& overrides) {
  Config config = Config::Parse(text, "<python>");
  for (const auto& [key, value] : overrides) {
    config.Set(py::str(key).cast<std::string>(), py::str(value).cast<std::string>());
  }
  return config;
}

std::shared_ptr<TrainedAgent> TrainFromConfig(const std::string& text, const py::kwargs& kw) {
  Config config = ConfigFrom(text, kw);
  const TrainConfig train = TrainConfigFrom(config);
  config.CheckAllUsed();
  py::gil_scoped_release release;
  return Train(train).agent;
}

std::shared_ptr<SmctsModel> SmctsFromConfig(const std::string& text, const py::kwargs& kw) {
  Config config = ConfigFrom(text, kw);
  const SmctsConfig smcts = SmctsConfigFrom(config);
  config.CheckAllUsed();
  py::gil_scoped_release release;
  return SmctsTrain(smcts).model;
}

py::dict StatsDict(const PairStats& s) {
  py::dict d;
  d["agent_a"] = s.agent_a;
  d["agent_b"] = s.agent_b;
  d["wins"] = s.wins;
  d["losses"] = s.losses;
  d["draws"] = s.draws;
  d["matches"] = s.matches;
  d["mean_score_a"] = s.mean_score_a;
  d["std_score_a"] = s.std_score_a;
  d["seed"] = s.seed;
  d["win_rate"] = s.WinRate();
  return d;
}

}  // namespace
}  // namespace nncce

PYBIND11_MODULE(_nncce, m) {
  using namespace nncce;
  m.doc() = "Coarse correlated equilibrium learning for simultaneous-move games";

  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<RuntimeFailure>(m, "RuntimeFailure", PyExc_RuntimeError);

  py::class_<GameState>(m, "GameState")
      .def_readonly("payload", &GameState::payload)
      .def_readonly("timestep", &GameState::timestep)
      .def_readonly("terminal", &GameState::terminal)
      .def("__eq__", &GameState::operator==);

  py::class_<Game, std::shared_ptr<Game>>(m, "Game")
      .def_property_readonly("id", [](const Game& g) { return g.spec().id; })
      .def_property_readonly("num_players", &Game::num_players)
      .def_property_readonly("horizon", &Game::horizon)
      .def_property_readonly("action_counts", [](const Game& g) { return g.spec().action_counts; })
      .def_property_readonly("return_lo", [](const Game& g) { return g.spec().return_lo; })
      .def_property_readonly("return_hi", [](const Game& g) { return g.spec().return_hi; })
      .def("start_states",
           [](const Game& g) {
             std::vector<GameState> out;
             for (const auto& [s, p] : g.spec().start_distribution) out.push_back(s);
             return out;
           })
      .def("sample_start",
           [](const Game& g, uint64_t seed) {
             Rng rng(seed);
             return g.SampleStart(rng);
           })
      .def("legal_actions", &Game::LegalActions)
      .def("step",
           [](const Game& g, const GameState& s, const JointAction& joint) {
             const StepResult r = g.Step(s, joint);
             return py::make_tuple(r.next_state, r.rewards);
           })
      .def("observe", &Game::Observe)
      .def("state_to_string", &Game::StateToString);

  m.def("make_game", [](const std::string& id) {
    return std::const_pointer_cast<Game>(MakeGame(id));
  }, py::arg("id"));
  m.def("matrix_payoffs", [](const std::string& id) {
    const auto game = MakeGame(id);
    const auto* matrix = dynamic_cast<const MatrixGame*>(game.get());
    if (!matrix) throw ContractViolation(StrCat(id, " is not a matrix game"));
    return matrix->payoffs();
  });

  py::class_<IxParams>(m, "IxParams")
      .def(py::init<double, double>(), py::arg("eta"), py::arg("gamma_ix"))
      .def_readwrite("eta", &IxParams::eta)
      .def_readwrite("gamma_ix", &IxParams::gamma_ix);
  m.def("default_schedule", &DefaultSchedule, py::arg("num_actions"), py::arg("rounds"));
  m.def("ix_update",
        [](const std::vector<double>& log_weights, int chosen, double loss, double p,
           const IxParams& params) {
          return IxUpdate(WeightRow{log_weights}, chosen, loss, p, params).log_weights;
        },
        py::arg("log_weights"), py::arg("chosen"), py::arg("loss"), py::arg("p_chosen"),
        py::arg("params"));
  m.def("policy_from_weights",
        [](const std::vector<double>& log_weights) {
          return PolicyFromWeights(WeightRow{log_weights});
        });
  m.def("normalize_losses", &NormalizeLosses);
  m.def("solve_matrix", &SolveMatrix, py::arg("action_counts"), py::arg("payoffs"),
        py::arg("rounds") = 10000, py::arg("prune") = true, py::arg("seed") = 0,
        py::arg("verify") = true);
  m.def("verify_cce", &VerifyMatrix, py::arg("action_counts"), py::arg("payoffs"),
        py::arg("distribution"));

  py::class_<TrainedAgent, std::shared_ptr<TrainedAgent>>(m, "TrainedAgent")
      .def_readonly("game_id", &TrainedAgent::game_id)
      .def_readonly("gate_score", &TrainedAgent::gate_score)
      .def_readonly("iteration", &TrainedAgent::iteration)
      .def("value_model_count", &TrainedAgent::ValueModelCount)
      .def("policy", &TrainedAgent::Policy, py::arg("state"), py::arg("player"))
      .def("save", [](const TrainedAgent& a, const std::string& dir) { SaveTrainedAgent(a, dir); });
  m.def("load_trained_agent", &LoadTrainedAgent, py::arg("dir"), py::arg("game_id"));
  m.def("train", &TrainFromConfig, py::arg("config") = "",
        "Trains NN-CCE agents from config text; keyword arguments override keys.");

  py::class_<SmctsModel, std::shared_ptr<SmctsModel>>(m, "SmctsModel")
      .def_readonly("game_id", &SmctsModel::game_id)
      .def_readonly("gate_score", &SmctsModel::gate_score)
      .def("save", [](const SmctsModel& s, const std::string& dir) { SaveSmctsModel(s, dir); });
  m.def("train_smcts", &SmctsFromConfig, py::arg("config") = "");
  m.def("smcts_search",
        [](const std::string& game_id, int64_t simulations, uint64_t seed, bool update) {
          const auto game = MakeGame(game_id);
          Rng rng(seed);
          const auto r = SmctsSearch(*game, game->SampleStart(rng), UniformPolicySource(),
                                     {simulations, update ? WeightUpdate::kIx : WeightUpdate::kNone},
                                     seed);
          return py::make_tuple(r.value, r.policies);
        },
        py::arg("game_id"), py::arg("simulations"), py::arg("seed") = 0,
        py::arg("update") = true, "Search from a sampled start state with a uniform prior.");

  m.def("head2head",
        [](const std::string& game_id, const std::string& agent_a, const std::string& agent_b,
           int64_t matches, uint64_t seed, int64_t smcts_simulations, int threads) {
          const auto game = MakeGame(game_id);
          const auto a = LoadAgent(agent_a, game->spec().id, smcts_simulations);
          const auto b = LoadAgent(agent_b, game->spec().id, smcts_simulations);
          PairStats stats;
          {
            py::gil_scoped_release release;
            stats = Summarize(PlayMatches(*game, *a, *b, matches, seed, threads), seed);
          }
          return StatsDict(stats);
        },
        py::arg("game_id"), py::arg("agent_a"), py::arg("agent_b"), py::arg("matches") = 200,
        py::arg("seed") = 0, py::arg("smcts_simulations") = 100, py::arg("threads") = 1);
  m.def("wilson_lower_bound", &WilsonLowerBound);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = RunCli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"));
}
