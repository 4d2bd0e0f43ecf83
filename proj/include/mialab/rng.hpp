//
// Copyright 2026 The mialab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mialab/error.hpp"

namespace mialab {

namespace detail {

// SplitMix64 avalanche step; used to turn (seed, stream_id) pairs into
// well-separated engine seeds.
inline constexpr std::uint64_t split_mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t mix_seed_stream(std::uint64_t seed, std::uint64_t stream) {
  return split_mix64(split_mix64(seed) ^ split_mix64(stream ^ 0x517cc1b727220a95ULL));
}

}  // namespace detail

// A reproducible random stream addressed by (seed, stream_id). The same pair
// always yields the same sample sequence; child streams for parallel tasks
// are derived by hashing the task index into the stream id, so results do
// not depend on the execution schedule. A stream is owned by one task at a
// time; copies restart from the current engine state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id),
        engine_(detail::mix_seed_stream(seed, stream_id)) {}

  // Child stream for the given task index; statistically independent of the
  // parent and of siblings with different indices.
  RngStream derive(std::uint64_t task_index) const {
    return RngStream(seed_, detail::split_mix64(stream_id_ * 0x2545f4914f6cdd1dULL + task_index + 1));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform draw strictly inside (0,1); 53 usable bits.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (cosine branch only, no cached state).
  double next_normal() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

// Gamma(shape, 1) sampler. Marsaglia-Tsang squeeze rejection for shape >= 1;
// shapes below 1 are boosted through Gamma(shape+1) * U^(1/shape).
inline double sample_gamma(double shape, RngStream& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw ValidationError("sample_gamma: shape must be positive and finite");
  }
  double boost = 1.0;
  if (shape < 1.0) {
    boost = std::pow(rng.next_uniform(), 1.0 / shape);
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z;
    double v;
    do {
      z = rng.next_normal();
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_uniform();
    const double z2 = z * z;
    if (u < 1.0 - 0.0331 * z2 * z2 ||
        std::log(u) < 0.5 * z2 + d * (1.0 - v + std::log(v))) {
      return d * v * boost;
    }
  }
}

// Dirichlet(gamma) draw into `out` (normalized independent Gamma draws).
inline void sample_dirichlet(std::span<const double> gamma, RngStream& rng,
                             std::span<double> out) {
  if (gamma.size() < 2) {
    throw ValidationError("sample_dirichlet: need at least two components");
  }
  if (out.size() != gamma.size()) {
    throw ValidationError("sample_dirichlet: output size mismatch");
  }
  for (int attempt = 0; attempt < 100; ++attempt) {
    double sum = 0.0;
    for (std::size_t k = 0; k < gamma.size(); ++k) {
      out[k] = sample_gamma(gamma[k], rng);
      sum += out[k];
    }
    if (sum > 0.0) {
      for (double& x : out) x /= sum;
      return;
    }
    // All draws underflowed to zero; only reachable for extreme shapes.
  }
  throw ComputationError("sample_dirichlet: repeated total underflow");
}

inline std::vector<double> sample_dirichlet(std::span<const double> gamma, RngStream& rng) {
  std::vector<double> out(gamma.size());
  sample_dirichlet(gamma, rng, out);
  return out;
}

}  // namespace mialab
