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

#include "nncce/cli.h"

#include <filesystem>
#include <sstream>

#include "doctest.h"

namespace nncce {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path Scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nncce_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string Write(const fs::path& path, const std::string& text) {
  WriteFileAtomic(path.string(), text);
  return path.string();
}

const char kTinyTrain[] =
    "train.outer_iters = 1\n"
    "train.trajectories = 100\n"
    "cce.rounds = 500\n"
    "q.hidden = 8\nq.representation = 4\nq.head_hidden = 8\nq.epochs = 1\n"
    "policy.hidden = 8\npolicy.epochs = 1\n"
    "gate.matches = 10\n";

TEST_CASE("config parsing") {
  Config config = Config::Parse(
      "# comment\n"
      "game = goofspiel:3   # trailing comment\n"
      "cce.rounds = 123\n"
      "q.hidden = 4, 5\n"
      "policy.hidden = none\n"
      "train.share_values = false\n",
      "test.cfg");
  CHECK(config.GetString("game", "") == "goofspiel:3");
  CHECK(config.GetInt("cce.rounds", 0) == 123);
  CHECK(config.GetIntList("q.hidden", {}) == std::vector<int>{4, 5});
  CHECK(config.GetIntList("policy.hidden", {1}).empty());
  CHECK_FALSE(config.GetBool("train.share_values", true));
  CHECK(config.GetDouble("missing", 2.5) == 2.5);
  CHECK_NOTHROW(config.CheckAllUsed());

  CHECK_THROWS_AS(Config::Parse("novalue\n"), ContractViolation);
  CHECK_THROWS_AS(Config::Parse("a = 1\na = 2\n"), ContractViolation);
  Config bad = Config::Parse("cce.rounds = many\n");
  CHECK_THROWS_AS(bad.GetInt("cce.rounds", 0), ContractViolation);
  Config typo = Config::Parse("game = goofspiel:3\ncce.roundz = 5\n", "typo.cfg");
  TrainConfigFrom(typo);
  try {
    typo.CheckAllUsed();
    FAIL("expected unknown key");
  } catch (const ContractViolation& e) {
    CHECK(std::string(e.what()).find("typo.cfg:2: unknown key 'cce.roundz'") !=
          std::string::npos);
  }
}

TEST_CASE("documented defaults") {
  Config empty = Config::Parse("");
  const TrainConfig train = TrainConfigFrom(empty);
  const TrainConfig defaults;
  CHECK(train.game == defaults.game);
  CHECK(train.cce.rounds == defaults.cce.rounds);
  CHECK(train.q.hidden == defaults.q.hidden);
  CHECK(train.policy.hidden == std::vector<int>{1028, 1028});
  CHECK(train.threads >= 1);
  Config explicit_threads = Config::Parse("threads = 3\n");
  CHECK(SmctsConfigFrom(explicit_threads).threads == 3);
}

TEST_CASE("verify-cce on the prisoner's dilemma files") {
  const fs::path dir = Scratch("verify");
  const auto game = Write(dir / "pd.game", "2 2 2\n3 3\n0 5\n5 0\n1 1\n");
  const auto dist = Write(dir / "uniform.dist", "0,0,0.25\n0,1,0.25\n1,0,0.25\n1,1,0.25\n");
  // Normalized losses CC 0.4, CD 1, DC 0, DD 0.8: uniform play loses 0.55 in
  // expectation, always defecting loses 0.4.
  const auto run = Run({"verify-cce", game, dist});
  CHECK(run.code == 0);
  CHECK(run.out == "0.150000\n");
  const auto dd = Write(dir / "dd.dist", "1,1,1\n");
  CHECK(Run({"verify-cce", game, dd}).out == "0.000000\n");
}

TEST_CASE("usage errors exit with 1") {
  CHECK(Run({}).code == 1);
  CHECK(Run({"frobnicate"}).code == 1);
  CHECK(Run({"train"}).code == 1);
  CHECK(Run({"--bogus", "train", "x.cfg"}).code == 1);
  const auto missing = Run({"train", "/nonexistent/dir/train.cfg"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("/nonexistent/dir/train.cfg") != std::string::npos);
  CHECK(Run({"verify-cce", "/nonexistent.game", "/nonexistent.dist"}).code == 1);
  const fs::path dir = Scratch("usage");
  const auto cfg = Write(dir / "bad.cfg", "game = goofspiel:3\nnot.a.key = 1\n");
  CHECK(Run({"train", cfg}).code == 1);
  CHECK(Run({"--help"}).code == 0);
}

TEST_CASE("runtime failures exit with 2") {
  const fs::path dir = Scratch("runtime");
  const auto cfg = Write(dir / "h2h.cfg",
                         "game = goofspiel:3\nagent_a = nncce:" + (dir / "none").string() +
                             "\noutput.csv = " + (dir / "x.csv").string() + "\n");
  CHECK(Run({"head2head", cfg}).code == 2);
}

TEST_CASE("train, head2head and tournament end to end") {
  const fs::path dir = Scratch("e2e");
  const fs::path ckpt = dir / "ckpt";
  const auto train_cfg =
      Write(dir / "train.cfg", std::string("game = matrix:matching_pennies\n") + kTinyTrain +
                                   "output.dir = " + ckpt.string() + "\n");
  const auto train = Run({"train", train_cfg, "--seed", "4", "--sequential"});
  REQUIRE(train.code == 0);
  CHECK(fs::exists(ckpt / "matrix-matching_pennies_0_policy.ccef"));
  CHECK(fs::exists(ckpt / "matrix-matching_pennies_0_0.ccef"));
  CHECK(fs::exists(ckpt / "train_log.ndjson"));

  const auto smcts_cfg = Write(
      dir / "smcts.cfg",
      "game = matrix:matching_pennies\nsmcts.iterations = 1\nsmcts.simulations = 50\n"
      "smcts.eval_simulations = 5\nsmcts.train_batches = 2\nsmcts_policy.hidden = 8\n"
      "smcts_value.hidden = 8\ngate.matches = 4\noutput.dir = " + ckpt.string() + "\n");
  REQUIRE(Run({"train-smcts", smcts_cfg, "--sequential"}).code == 0);
  CHECK(fs::exists(ckpt / "matrix-matching_pennies_1_smcts_value.ccef"));

  const std::string agents = "nncce:" + ckpt.string() + ", smcts:" + ckpt.string() + ", random";
  const auto tour_cfg = Write(dir / "tour.cfg", "game = matrix:matching_pennies\nagents = " +
                                                    agents + "\nmatch.count = 20\n"
                                                    "smcts.eval_simulations = 5\n"
                                                    "output.csv = " +
                                                    (dir / "t.csv").string() + "\n");
  REQUIRE(Run({"tournament", tour_cfg, "--seed", "9"}).code == 0);
  const std::string first = ReadFile((dir / "t.csv").string());
  const WinTable table = ParseWinTableCsv(first);
  CHECK(table.size() == 3);
  REQUIRE(Run({"tournament", tour_cfg, "--seed", "9", "--sequential"}).code == 0);
  CHECK(ReadFile((dir / "t.csv").string()) == first);

  const auto h2h_cfg = Write(dir / "h2h.cfg",
                             "game = matrix:matching_pennies\nagent_a = nncce:" +
                                 ckpt.string() + "\nmatch.count = 30\noutput.csv = " +
                                 (dir / "h.csv").string() + "\noutput.matches = " +
                                 (dir / "m.csv").string() + "\n");
  const auto h2h = Run({"head2head", h2h_cfg});
  REQUIRE(h2h.code == 0);
  CHECK(ParseWinTableCsv(ReadFile((dir / "h.csv").string()))[0].matches == 30);
  CHECK(Split(Trim(ReadFile((dir / "m.csv").string())), '\n').size() == 31);
}

TEST_CASE("gen-data writes replay entries") {
  const fs::path dir = Scratch("gen");
  const auto cfg = Write(dir / "gen.cfg", "game = goofspiel:3\ndata.simulations = 200\n"
                                          "output.replay = " +
                                              (dir / "r.tsv").string() + "\n");
  const auto run = Run({"gen-data", cfg});
  REQUIRE(run.code == 0);
  const std::string tsv = ReadFile((dir / "r.tsv").string());
  CHECK_FALSE(tsv.empty());
  const auto again = Run({"gen-data", cfg});
  CHECK(ReadFile((dir / "r.tsv").string()) == tsv);
}

}  // namespace
}  // namespace nncce
