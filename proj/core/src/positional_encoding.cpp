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

#include "cxrlt/positional_encoding.hpp"

#include <cmath>
#include <string>

#include "cxrlt/error.hpp"

namespace cxrlt {

Tensor positional_encoding_table(int height, int width, int channels) {
  if (channels < 2 || channels % 2 != 0) {
    throw ConfigError("positional encoding needs an even channel count, got " +
                      std::to_string(channels));
  }
  const int half = channels / 2;
  Tensor table(height * width, channels);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double* row = table.row(y * width + x).data();
      for (int j = 0; j < half; ++j) {
        const double freq = std::pow(10000.0, -2.0 * (j / 2) / half);
        row[j] = (j % 2 == 0) ? std::sin(y * freq) : std::cos(y * freq);
        row[half + j] = (j % 2 == 0) ? std::sin(x * freq) : std::cos(x * freq);
      }
    }
  }
  return table;
}

FeatureMap positional_encode(const FeatureMap& fmap) {
  FeatureMap out = fmap;
  out.values += positional_encoding_table(fmap.height, fmap.width, fmap.channels);
  return out;
}

}  // namespace cxrlt
