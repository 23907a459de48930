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

#ifndef CXRLT_POSITIONAL_ENCODING_HPP_
#define CXRLT_POSITIONAL_ENCODING_HPP_

#include "cxrlt/backbone.hpp"

namespace cxrlt {

// Fixed 2-D sine-cosine table, (height * width) x channels. The first half of
// the channels encodes the row, the second half the column. Within a half of
// size d, channel j uses frequency 10000^(-2 floor(j/2) / d), sine for even j
// and cosine for odd j. Throws ConfigError for odd `channels`.
Tensor positional_encoding_table(int height, int width, int channels);

// Adds the table to the map; the shape is unchanged.
FeatureMap positional_encode(const FeatureMap& fmap);

}  // namespace cxrlt

#endif  // CXRLT_POSITIONAL_ENCODING_HPP_
