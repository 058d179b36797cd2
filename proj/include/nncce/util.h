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

#ifndef NNCCE_UTIL_H_
#define NNCCE_UTIL_H_

#include <cstdint>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nncce {

// Raised when a caller breaks an operation's precondition (illegal action,
// loss outside [0,1], dimension mismatch, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a computation fails at runtime (non-finite training loss,
// unreadable checkpoint, ...).
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename... Args>
std::string StrCat(const Args&... args) {
  std::ostringstream out;
  (out << ... << args);
  return out.str();
}

// All randomness flows through explicitly seeded engines owned by the caller.
using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent child seeds.
inline uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t DeriveSeed(uint64_t seed, uint64_t stream) {
  return Mix64(seed ^ Mix64(stream + 0x632be59bd9b4e019ULL));
}

inline double Uniform01(Rng& rng) {
  // 53 random bits, never returns 1.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int UniformInt(Rng& rng, int n) {
  return static_cast<int>(Uniform01(rng) * n);
}

// Draws an index from an unnormalized non-negative weight vector. Entries with
// zero weight are never returned.
int SampleCategorical(std::span<const double> weights, Rng& rng);

// Writes `contents` to `path` through a temporary file and a rename.
void WriteFileAtomic(const std::string& path, std::string_view contents);

std::string ReadFile(const std::string& path);

std::vector<std::string> Split(std::string_view text, char delim);
std::string Trim(std::string_view text);

// Formats a double so that parsing it back yields the same value.
std::string FormatDouble(double value);

// Minimal leveled logging to stderr, controlled by CCE_LOG=debug|info.
enum class LogLevel { kDebug = 0, kInfo = 1, kQuiet = 2 };
LogLevel CurrentLogLevel();
void LogMessage(LogLevel level, const std::string& message);
inline void LogInfo(const std::string& message) {
  LogMessage(LogLevel::kInfo, message);
}
inline void LogDebug(const std::string& message) {
  LogMessage(LogLevel::kDebug, message);
}

}  // namespace nncce

#endif  // NNCCE_UTIL_H_
