/*
 * Copyright 2026 The cxrlt Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CXRLT_RANDOM_HPP_
#define CXRLT_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace cxrlt {

// Deterministic random stream. Only the raw mt19937_64 output (which the
// standard pins down bit for bit) is consumed; the distributions are
// implemented here so results do not depend on the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  // Uniform integer in [lo, hi].
  int integer(int lo, int hi);
  double normal(double mean = 0.0, double stddev = 1.0);
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer; combines seeds without correlation between streams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

// Per-sample augmentation seed: hash(global_seed, epoch, sample_id).
std::uint64_t derive_sample_seed(std::uint64_t global_seed, std::uint64_t epoch,
                                 std::string_view sample_id);

}  // namespace cxrlt

#endif  // CXRLT_RANDOM_HPP_
