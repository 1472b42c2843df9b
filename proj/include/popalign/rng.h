// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POPALIGN_RNG_H_
#define POPALIGN_RNG_H_

#include <array>
#include <cstdint>
#include <span>
#include <utility>

namespace popalign {

// Philox4x32-10 block function. Pure integer arithmetic, so the output is
// identical on every platform.
std::array<std::uint32_t, 4> Philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Counter-based random stream. A stream is (key, stream id, position); draws
// walk the position forward. Split() derives a child stream whose key is a
// Philox image of the parent key, so children never share blocks with the
// parent or with each other.
//
// Streams are single-owner values: copy one to replay it, split it before
// handing work to another thread.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t NextU64();
  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  // Uniform on (0, 1); safe to take the log of.
  double UniformOpen();
  // Standard normal via Box-Muller. The second value of each pair is cached.
  double Normal();
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t UniformInt(std::uint64_t n);
  // Index drawn with probability proportional to `weights`.
  int Categorical(std::span<const double> weights);

  // Returns a fresh child stream and advances this stream's split counter.
  RngStream Split();
  // Convenience for the two-way split used by parallel sweeps.
  std::pair<RngStream, RngStream> SplitPair();

  std::uint64_t key() const { return key_; }

 private:
  RngStream(std::uint64_t key, std::uint64_t stream);

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::uint64_t splits_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;  // 32-bit words left in buffer_
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace popalign

#endif  // POPALIGN_RNG_H_
