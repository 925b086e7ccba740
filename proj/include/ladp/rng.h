/*
 * Copyright 2026 The ladp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef LADP_RNG_H_
#define LADP_RNG_H_

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <utility>
#include <vector>

namespace ladp {

// Path elements naming what a random stream is used for. Streams for
// different purposes never share a key.
enum class Purpose : std::uint64_t {
  kInit = 1,
  kTestSplit = 2,
  kPartition = 3,
  kClientSampling = 4,
  kBatchShuffle = 5,
  kNoise = 6,
  kSynthetic = 7,
  kClient = 8,
  kTest = 99,
};

namespace rng_internal {

inline constexpr std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Philox4x32-10 (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> Philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

}  // namespace rng_internal

// An immutable description of a random stream: a root seed plus a path of
// integers, e.g. (kNoise, round, client, layer). Children are derived
// functionally so no generator state is ever shared between workers.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), key_(rng_internal::SplitMix64(seed)) {}

  RngStream Child(std::uint64_t element) const {
    RngStream child = *this;
    child.path_.push_back(element);
    child.key_ = rng_internal::SplitMix64(
        key_ ^ rng_internal::SplitMix64(element + 0x632BE59BD9B4E019ULL * child.path_.size()));
    return child;
  }
  RngStream Child(Purpose purpose) const {
    return Child(static_cast<std::uint64_t>(purpose));
  }
  RngStream Child(std::initializer_list<std::uint64_t> elements) const {
    RngStream s = *this;
    for (std::uint64_t e : elements) s = s.Child(e);
    return s;
  }

  std::uint64_t seed() const { return seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }
  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t seed_;
  std::vector<std::uint64_t> path_;
  std::uint64_t key_;
};

// Counter-based engine reading the sequence keyed by one RngStream. Draw i of
// the sequence depends only on (key, i), never on other streams.
class RandomEngine {
 public:
  explicit RandomEngine(const RngStream& stream)
      : key_{static_cast<std::uint32_t>(stream.key()),
             static_cast<std::uint32_t>(stream.key() >> 32)} {}

  std::uint64_t NextU64() {
    if (buffered_ == 0) Refill();
    --buffered_;
    return buffer_[buffered_];
  }

  // Uniform on [0, 1).
  double Uniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  double UniformOpenZero() {
    return static_cast<double>((NextU64() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t UniformInt(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = NextU64();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Box-Muller; both outputs of each pair are used.
  double Normal() {
    if (has_spare_normal_) {
      has_spare_normal_ = false;
      return spare_normal_;
    }
    const double u1 = UniformOpenZero();
    const double u2 = Uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_normal_ = radius * std::sin(angle);
    has_spare_normal_ = true;
    return radius * std::cos(angle);
  }

  // log of a Gamma(shape, 1) draw, Marsaglia-Tsang. Working in log space keeps
  // very small shapes (Dirichlet alpha = 0.01) from underflowing to zero.
  double LogGamma(double shape) {
    if (shape < 1.0) {
      const double boosted = LogGamma(shape + 1.0);
      return boosted + std::log(UniformOpenZero()) / shape;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
      do {
        x = Normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = UniformOpenZero();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
        return std::log(d * v);
      }
    }
  }

  template <class T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(UniformInt(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  void Refill() {
    const auto out = rng_internal::Philox4x32(
        {static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u},
        key_);
    ++counter_;
    buffer_[1] = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    buffer_[0] = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
    buffered_ = 2;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

}  // namespace ladp

#endif  // LADP_RNG_H_
