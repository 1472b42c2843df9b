// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/core.h"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace popalign {

std::string_view ConditionName(Condition c) {
  switch (c) {
    case Condition::kNeutral:
      return "neutral";
    case Condition::kAttrA:
      return "attr-a";
    case Condition::kAttrB:
      return "attr-b";
    case Condition::kUnrelated:
      return "unrelated";
  }
  return "?";
}

Condition ParseCondition(std::string_view name) {
  for (int i = 0; i < kNumConditions; ++i) {
    const auto c = static_cast<Condition>(i);
    if (ConditionName(c) == name) return c;
  }
  throw InvalidArgument("unknown condition: " + std::string(name));
}

void Population::Validate() const {
  if (samples.empty()) throw InvalidArgument("population must hold at least one sample");
  const int d = samples.front().dim();
  if (d < 1) throw InvalidArgument("sample dimension must be >= 1");
  for (const Sample& s : samples) {
    if (s.condition != condition) {
      throw InvalidArgument("sample condition differs from its population");
    }
    if (s.dim() != d) throw InvalidArgument("sample dimension differs within population");
    for (double v : s.x) {
      if (!std::isfinite(v)) throw InvalidArgument("non-finite sample coordinate");
    }
  }
}

PreferencePair PreferencePair::Make(Population winner, Population loser) {
  PreferencePair pair{std::move(winner), std::move(loser), Condition::kNeutral};
  pair.condition = pair.winner.condition;
  pair.Validate();
  return pair;
}

void PreferencePair::Validate() const {
  winner.Validate();
  loser.Validate();
  if (winner.condition != condition || loser.condition != condition) {
    throw InvalidArgument("winner, loser and pair must share one condition");
  }
  if (winner.size() != loser.size()) {
    throw InvalidArgument("winner and loser populations must have equal N");
  }
  if (winner.dim() != loser.dim()) {
    throw InvalidArgument("winner and loser dimensions differ");
  }
}

double AlignConfig::BetaPrime(int diffusion_steps) const {
  if (beta_prime_mode == BetaPrimeMode::kExplicit) return beta_prime_value;
  return 2.0 * population_size * diffusion_steps * beta;
}

void AlignConfig::Validate() const {
  if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  if (population_size < 1) throw InvalidArgument("population_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw InvalidArgument("learning_rate must be >= 0");
  if (steps < 0) throw InvalidArgument("steps must be >= 0");
  if (batch_size < 0) throw InvalidArgument("batch_size must be >= 0");
  if (log_every < 1) throw InvalidArgument("log_every must be >= 1");
  if (beta_prime_mode == BetaPrimeMode::kExplicit && !(beta_prime_value > 0.0)) {
    throw InvalidArgument("explicit beta_prime must be positive");
  }
}

void TraceLog::Append(Row row) {
  if (!rows_.empty() && row.iter <= rows_.back().iter) {
    throw InvalidArgument("trace iterations must be strictly increasing");
  }
  if (row.extra.size() != extra_columns_.size()) {
    throw InvalidArgument("trace row does not match its extra columns");
  }
  rows_.push_back(std::move(row));
}

void TraceLog::WriteCsv(std::ostream& os, bool with_wall_clock) const {
  os << "iter,loss,discrepancy";
  for (const auto& c : extra_columns_) os << ',' << c;
  if (with_wall_clock) os << ",wall_s";
  os << '\n';
  for (const Row& r : rows_) {
    os << r.iter << ',' << FormatDouble(r.loss) << ',' << FormatDouble(r.discrepancy);
    for (double v : r.extra) os << ',' << FormatDouble(v);
    if (with_wall_clock) os << ',' << FormatDouble(r.wall_seconds);
    os << '\n';
  }
}

namespace {

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

TraceLog TraceLog::ReadCsv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("empty trace csv");
  auto header = SplitCsvLine(line);
  if (header.size() < 3 || header[0] != "iter" || header[1] != "loss" ||
      header[2] != "discrepancy") {
    throw InvalidArgument("trace csv header must start with iter,loss,discrepancy");
  }
  const bool with_wall = header.back() == "wall_s";
  std::vector<std::string> extras(header.begin() + 3, header.end() - (with_wall ? 1 : 0));
  TraceLog log(extras);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = SplitCsvLine(line);
    if (f.size() != header.size()) throw InvalidArgument("trace csv row has wrong arity");
    Row r;
    r.iter = std::stoll(f[0]);
    r.loss = ParseDouble(f[1]);
    r.discrepancy = ParseDouble(f[2]);
    for (std::size_t i = 0; i < extras.size(); ++i) r.extra.push_back(ParseDouble(f[3 + i]));
    if (with_wall) r.wall_seconds = ParseDouble(f.back());
    log.Append(std::move(r));
  }
  return log;
}

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double ParseDouble(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  if (text == "nan") return std::nan("");
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InvalidArgument("not a number: " + std::string(text));
  }
  return v;
}

}  // namespace popalign
