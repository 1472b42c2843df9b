// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/rng.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace popalign {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// XORed into the stream id for key-derivation blocks so they never coincide
// with the data blocks of the same stream.
constexpr std::uint64_t kSplitDomain = 0xA5A5A5A5'00000000ull;

inline void MulHiLo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

std::array<std::uint32_t, 2> SplitKey(std::uint64_t key) {
  return {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
}

}  // namespace

std::array<std::uint32_t, 4> Philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    MulHiLo(kMul0, ctr[0], hi0, lo0);
    MulHiLo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t seed) : RngStream(seed, 0) {}

RngStream::RngStream(std::uint64_t key, std::uint64_t stream)
    : key_(key), stream_(stream) {}

std::uint64_t RngStream::NextU64() {
  if (buffered_ < 2) {
    buffer_ = Philox4x32(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
         static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
        SplitKey(key_));
    ++block_;
    buffered_ = 4;
  }
  const int i = 4 - buffered_;
  buffered_ -= 2;
  return (static_cast<std::uint64_t>(buffer_[i]) << 32) | buffer_[i + 1];
}

double RngStream::Uniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double RngStream::UniformOpen() {
  return (static_cast<double>(NextU64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::Normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = UniformOpen();
  const double u2 = Uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

std::uint64_t RngStream::UniformInt(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("UniformInt: n must be positive");
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = NextU64();
  } while (v >= limit);
  return v % n;
}

int RngStream::Categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw std::invalid_argument("Categorical: weights must sum to > 0");
  const double target = Uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (target < acc) return static_cast<int>(i);
  }
  // Round-off can leave target == total; return the last positive entry.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

RngStream RngStream::Split() {
  const std::uint64_t n = splits_++;
  const auto out = Philox4x32(
      {static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(n >> 32),
       static_cast<std::uint32_t>(stream_ ^ kSplitDomain),
       static_cast<std::uint32_t>((stream_ ^ kSplitDomain) >> 32)},
      SplitKey(key_));
  const std::uint64_t child_key = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  const std::uint64_t child_stream = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
  return RngStream(child_key, child_stream);
}

std::pair<RngStream, RngStream> RngStream::SplitPair() {
  RngStream left = Split();
  RngStream right = Split();
  return {std::move(left), std::move(right)};
}

}  // namespace popalign
