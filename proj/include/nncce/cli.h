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

#ifndef NNCCE_CLI_H_
#define NNCCE_CLI_H_

// Configuration files and the `nncce` command line.
//
// Config files hold one `key = value` per line with dotted section names
// (`cce.rounds = 10000`). `#` starts a comment. Every key a command does not
// read is an error.

#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "nncce/baseline.h"
#include "nncce/harness.h"
#include "nncce/trainer.h"

namespace nncce {

class Config {
 public:
  static Config Parse(const std::string& text, const std::string& source = "<config>");
  // Throws ContractViolation naming the path when it cannot be read.
  static Config Load(const std::string& path);

  void Set(const std::string& key, const std::string& value);
  bool Has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string GetString(const std::string& key, const std::string& fallback);
  int64_t GetInt(const std::string& key, int64_t fallback);
  uint64_t GetUint(const std::string& key, uint64_t fallback);
  double GetDouble(const std::string& key, double fallback);
  bool GetBool(const std::string& key, bool fallback);
  // Comma-separated integers; "none" or an empty value is an empty list.
  std::vector<int> GetIntList(const std::string& key, const std::vector<int>& fallback);
  std::vector<std::string> GetList(const std::string& key,
                                   const std::vector<std::string>& fallback);

  // Throws ContractViolation for the first key never read.
  void CheckAllUsed() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  const Entry* Find(const std::string& key);
  [[noreturn]] void BadValue(const std::string& key, const Entry& entry,
                             const std::string& expected) const;

  std::string source_;
  std::map<std::string, Entry> entries_;
  std::set<std::string> used_;
};

TrainConfig TrainConfigFrom(Config& config);
SmctsConfig SmctsConfigFrom(Config& config);

// Agent specs: `random`, `nncce:<checkpoint dir>`, `smcts:<checkpoint dir>`.
AgentPtr LoadAgent(const std::string& spec, const std::string& game_id,
                   int64_t smcts_simulations);

// Entry point of the `nncce` tool; args exclude the program name. Returns 0
// on success, 1 on usage errors and 2 on runtime failures.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nncce

#endif  // NNCCE_CLI_H_
