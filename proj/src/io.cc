// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/io.h"

#include <istream>
#include <ostream>
#include <sstream>

namespace popalign {
namespace {

constexpr char kDatasetHeader[] = "# popalign-dataset v1";

void WriteSampleLine(std::ostream& os, int gamma, const Sample& s) {
  os << (gamma > 0 ? "+1" : "-1") << ' ';
  if (s.attribute) {
    os << *s.attribute;
  } else {
    os << '-';
  }
  for (double v : s.x) os << ' ' << FormatDouble(v);
  os << '\n';
}

void WritePopulationBody(std::ostream& os, int gamma, const Population& pop) {
  for (const Sample& s : pop.samples) WriteSampleLine(os, gamma, s);
}

// Reads `n` sample lines with the expected gamma label.
Population ReadPopulationBody(std::istream& is, Condition c, int n, int dim,
                              int expected_gamma) {
  Population pop;
  pop.condition = c;
  std::string line;
  for (int i = 0; i < n; ++i) {
    if (!std::getline(is, line)) throw InvalidArgument("dataset truncated");
    std::istringstream ls(line);
    std::string gamma, attr;
    ls >> gamma >> attr;
    const int g = gamma == "+1" ? 1 : gamma == "-1" ? -1 : 0;
    if (g != expected_gamma) throw InvalidArgument("dataset sample has wrong gamma label");
    Sample s;
    s.condition = c;
    if (attr != "-") s.attribute = std::stoi(attr);
    std::string tok;
    while (ls >> tok) s.x.push_back(ParseDouble(tok));
    if (s.dim() != dim) throw InvalidArgument("dataset sample has wrong dimension");
    pop.samples.push_back(std::move(s));
  }
  return pop;
}

void Expect(std::istringstream& hs, const char* word) {
  std::string tok;
  hs >> tok;
  if (tok != word) {
    throw InvalidArgument(std::string("dataset record: expected '") + word + "', got '" +
                          tok + "'");
  }
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double ToDouble(const std::string& key, const std::string& v) {
  try {
    return ParseDouble(v);
  } catch (const InvalidArgument&) {
    throw InvalidArgument("config key '" + key + "': not a number: " + v);
  }
}

long long ToInt(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) {
    throw InvalidArgument("config key '" + key + "': not an integer: " + v);
  }
  return out;
}

}  // namespace

void WriteDataset(std::ostream& os, const Dataset& data) {
  os << kDatasetHeader << '\n';
  for (std::size_t i = 0; i < data.pairs.size(); ++i) {
    const PreferencePair& p = data.pairs[i];
    p.Validate();
    os << "pair " << i << " condition " << ConditionName(p.condition) << " n "
       << p.winner.size() << " dim " << p.winner.dim() << '\n';
    WritePopulationBody(os, +1, p.winner);
    WritePopulationBody(os, -1, p.loser);
  }
  for (const Population& pop : data.populations) {
    pop.Validate();
    os << "population condition " << ConditionName(pop.condition) << " n " << pop.size()
       << " dim " << pop.dim() << '\n';
    WritePopulationBody(os, +1, pop);
  }
}

Dataset ReadDataset(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || Trim(line) != kDatasetHeader) {
    throw InvalidArgument("missing dataset header");
  }
  Dataset data;
  while (std::getline(is, line)) {
    if (Trim(line).empty()) continue;
    std::istringstream hs(line);
    std::string kind, cond_name;
    hs >> kind;
    if (kind == "pair") {
      std::size_t index = 0;
      hs >> index;
      if (index != data.pairs.size()) throw InvalidArgument("dataset pairs out of order");
    } else if (kind != "population") {
      throw InvalidArgument("unknown dataset record: " + kind);
    }
    int n = 0, dim = 0;
    Expect(hs, "condition");
    hs >> cond_name;
    Expect(hs, "n");
    hs >> n;
    Expect(hs, "dim");
    hs >> dim;
    if (!hs || n < 1 || dim < 1) throw InvalidArgument("malformed dataset record header");
    const Condition c = ParseCondition(cond_name);
    if (kind == "pair") {
      Population w = ReadPopulationBody(is, c, n, dim, +1);
      Population l = ReadPopulationBody(is, c, n, dim, -1);
      data.pairs.push_back(PreferencePair::Make(std::move(w), std::move(l)));
    } else {
      Population pop = ReadPopulationBody(is, c, n, dim, +1);
      pop.Validate();
      data.populations.push_back(std::move(pop));
    }
  }
  return data;
}

void WritePairs(std::ostream& os, const std::vector<PreferencePair>& pairs) {
  WriteDataset(os, Dataset{pairs, {}});
}

std::vector<PreferencePair> ReadPairs(std::istream& is) {
  return ReadDataset(is).pairs;
}

void WritePopulation(std::ostream& os, const Population& pop) {
  WriteDataset(os, Dataset{{}, {pop}});
}

Population ReadPopulation(std::istream& is) {
  Dataset d = ReadDataset(is);
  if (d.populations.size() != 1 || !d.pairs.empty()) {
    throw InvalidArgument("expected exactly one population record");
  }
  return std::move(d.populations.front());
}

std::map<std::string, std::string> ParseKeyValues(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    if (key.empty()) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": empty key");
    }
    out[key] = Trim(line.substr(eq + 1));
  }
  return out;
}

std::string OptimizerName(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind ParseOptimizer(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw InvalidArgument("unknown optimizer: " + name);
}

void ApplyConfig(const std::map<std::string, std::string>& kv, AlignConfig& config) {
  for (const auto& [key, value] : kv) {
    if (key == "beta") {
      config.beta = ToDouble(key, value);
    } else if (key == "alpha") {
      config.alpha = ToDouble(key, value);
    } else if (key == "population_size" || key == "n") {
      config.population_size = static_cast<int>(ToInt(key, value));
    } else if (key == "learning_rate" || key == "lr") {
      config.learning_rate = ToDouble(key, value);
    } else if (key == "steps") {
      config.steps = static_cast<int>(ToInt(key, value));
    } else if (key == "batch_size") {
      config.batch_size = static_cast<int>(ToInt(key, value));
    } else if (key == "seed") {
      if (value.empty() || value[0] == '-') {
        throw InvalidArgument("config key 'seed': not an unsigned integer: " + value);
      }
      std::size_t used = 0;
      config.seed = std::stoull(value, &used);
      if (used != value.size()) {
        throw InvalidArgument("config key 'seed': not an unsigned integer: " + value);
      }
    } else if (key == "beta_prime") {
      if (value == "auto") {
        config.beta_prime_mode = BetaPrimeMode::kAuto2NT;
      } else {
        config.beta_prime_mode = BetaPrimeMode::kExplicit;
        config.beta_prime_value = ToDouble(key, value);
      }
    } else if (key == "optimizer") {
      config.optimizer = ParseOptimizer(value);
    } else if (key == "weight_decay") {
      config.weight_decay = ToDouble(key, value);
    } else if (key == "log_every") {
      config.log_every = static_cast<int>(ToInt(key, value));
    } else {
      throw InvalidArgument("unknown config key: " + key);
    }
  }
  config.Validate();
}

void WriteConfig(std::ostream& os, const AlignConfig& config) {
  os << "beta = " << FormatDouble(config.beta) << '\n'
     << "alpha = " << FormatDouble(config.alpha) << '\n'
     << "population_size = " << config.population_size << '\n'
     << "learning_rate = " << FormatDouble(config.learning_rate) << '\n'
     << "steps = " << config.steps << '\n'
     << "batch_size = " << config.batch_size << '\n'
     << "seed = " << config.seed << '\n'
     << "beta_prime = "
     << (config.beta_prime_mode == BetaPrimeMode::kAuto2NT
             ? std::string("auto")
             : FormatDouble(config.beta_prime_value))
     << '\n'
     << "optimizer = " << OptimizerName(config.optimizer) << '\n'
     << "weight_decay = " << FormatDouble(config.weight_decay) << '\n'
     << "log_every = " << config.log_every << '\n';
}

}  // namespace popalign
