// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Plain-text formats: preference datasets, standalone populations and the
// `key = value` AlignConfig file.
//
// Dataset layout:
//
//   # popalign-dataset v1
//   pair <index> condition <name> n <N> dim <d>
//   +1 <attr|-> x_1 ... x_d        (N winner lines)
//   -1 <attr|-> x_1 ... x_d        (N loser lines)
//   population condition <name> n <N> dim <d>
//   +1 <attr|-> x_1 ... x_d        (N lines)
//
// Doubles are written in shortest round-trip form, so write/read is exact.

#ifndef POPALIGN_IO_H_
#define POPALIGN_IO_H_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "popalign/core.h"

namespace popalign {

struct Dataset {
  std::vector<PreferencePair> pairs;
  std::vector<Population> populations;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

void WriteDataset(std::ostream& os, const Dataset& data);
Dataset ReadDataset(std::istream& is);

// Convenience wrappers around WriteDataset/ReadDataset.
void WritePairs(std::ostream& os, const std::vector<PreferencePair>& pairs);
std::vector<PreferencePair> ReadPairs(std::istream& is);
void WritePopulation(std::ostream& os, const Population& pop);
Population ReadPopulation(std::istream& is);

// `key = value` lines; `#` starts a comment. Keys are returned verbatim.
std::map<std::string, std::string> ParseKeyValues(std::istream& is);

// Applies recognised keys to `config`. Unknown keys throw InvalidArgument so
// typos do not silently fall back to defaults.
void ApplyConfig(const std::map<std::string, std::string>& kv, AlignConfig& config);
void WriteConfig(std::ostream& os, const AlignConfig& config);

std::string OptimizerName(OptimizerKind kind);
OptimizerKind ParseOptimizer(const std::string& name);

}  // namespace popalign

#endif  // POPALIGN_IO_H_
