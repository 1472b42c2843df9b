// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Value types shared by every module: samples, populations, preference pairs,
// the alignment config and the training trace.

#ifndef POPALIGN_CORE_H_
#define POPALIGN_CORE_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace popalign {

// Thrown when an argument violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when a requested operation is not defined for the given backend.
class UnsupportedBackend : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Thrown when data generation cannot make progress.
class PipelineStarvation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Prompt categories. The mixture track only uses kNeutral for training data
// but samples attribute components through kAttrA/kAttrB; the diffusion track
// uses all four.
enum class Condition : std::uint8_t {
  kNeutral = 0,
  kAttrA = 1,
  kAttrB = 2,
  kUnrelated = 3,
};
inline constexpr int kNumConditions = 4;

std::string_view ConditionName(Condition c);
Condition ParseCondition(std::string_view name);

struct Sample {
  std::vector<double> x;
  Condition condition = Condition::kNeutral;
  // Attribute index into the experiment's attribute list, when known.
  std::optional<int> attribute;

  int dim() const { return static_cast<int>(x.size()); }
  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Population {
  Condition condition = Condition::kNeutral;
  std::vector<Sample> samples;

  int size() const { return static_cast<int>(samples.size()); }
  int dim() const { return samples.empty() ? 0 : samples.front().dim(); }
  // Throws InvalidArgument unless N >= 1, every sample shares the
  // population's condition and dimension, and all coordinates are finite.
  void Validate() const;
  friend bool operator==(const Population&, const Population&) = default;
};

struct PreferencePair {
  Population winner;
  Population loser;
  Condition condition = Condition::kNeutral;

  // Builds a pair and checks the shared-condition and equal-N invariants.
  static PreferencePair Make(Population winner, Population loser);
  void Validate() const;
  friend bool operator==(const PreferencePair&, const PreferencePair&) = default;
};

enum class BetaPrimeMode { kAuto2NT, kExplicit };
enum class OptimizerKind { kAdam, kSgd };

struct AlignConfig {
  double beta = 0.5;
  double alpha = 0.5;
  int population_size = 1;
  double learning_rate = 1e-2;
  int steps = 2000;
  // Pairs per minibatch; 0 means full batch.
  int batch_size = 0;
  std::uint64_t seed = 0;
  BetaPrimeMode beta_prime_mode = BetaPrimeMode::kAuto2NT;
  double beta_prime_value = 0.0;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double weight_decay = 0.0;
  // Trace row cadence.
  int log_every = 50;

  // beta' = 2 N T beta in auto mode, the explicit value otherwise.
  double BetaPrime(int diffusion_steps) const;
  void Validate() const;
  friend bool operator==(const AlignConfig&, const AlignConfig&) = default;
};

// Per-iteration training record. Serialized with the fixed header
// `iter,loss,discrepancy,<extra columns>` and an optional trailing wall_s.
class TraceLog {
 public:
  struct Row {
    std::int64_t iter = 0;
    double loss = 0.0;
    double discrepancy = 0.0;
    std::vector<double> extra;
    double wall_seconds = 0.0;
    friend bool operator==(const Row&, const Row&) = default;
  };

  TraceLog() = default;
  explicit TraceLog(std::vector<std::string> extra_columns)
      : extra_columns_(std::move(extra_columns)) {}

  // Iterations must be strictly increasing; `extra` must match the columns.
  void Append(Row row);

  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<std::string>& extra_columns() const { return extra_columns_; }
  bool empty() const { return rows_.empty(); }

  void WriteCsv(std::ostream& os, bool with_wall_clock = false) const;
  static TraceLog ReadCsv(std::istream& is);

  friend bool operator==(const TraceLog&, const TraceLog&) = default;

 private:
  std::vector<std::string> extra_columns_;
  std::vector<Row> rows_;
};

// Shortest decimal text that parses back to exactly `v`.
std::string FormatDouble(double v);
double ParseDouble(std::string_view text);

}  // namespace popalign

#endif  // POPALIGN_CORE_H_
