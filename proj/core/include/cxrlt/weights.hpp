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

#ifndef CXRLT_WEIGHTS_HPP_
#define CXRLT_WEIGHTS_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cxrlt/tensor.hpp"

namespace cxrlt {

// Weight manifest: a directory holding index.json and weights.bin.
// index.json lists {name, shape, dtype, offset} per tensor plus a free-form
// "metadata" object; weights.bin is the concatenation of the raw
// little-endian tensors, row-major. Writers emit float32; readers also
// accept float64.
inline constexpr std::string_view kWeightIndexFile = "index.json";
inline constexpr std::string_view kWeightBlobFile = "weights.bin";

enum class WeightDtype { kFloat32, kFloat64 };

struct WeightBundle {
  std::map<std::string, Tensor> tensors;
  std::string metadata_json = "{}";
};

void save_weights(const std::filesystem::path& dir, const std::vector<ConstTensorRef>& tensors,
                  std::string_view metadata_json = "{}",
                  WeightDtype dtype = WeightDtype::kFloat32);

WeightBundle load_weights(const std::filesystem::path& dir);

// Copies bundle tensors into `targets` by name. Throws ShapeError on shape
// mismatch and, when `require_all` is set, ConfigError on a missing name.
void assign_weights(const std::vector<TensorRef>& targets, const WeightBundle& bundle,
                    bool require_all = true);

}  // namespace cxrlt

#endif  // CXRLT_WEIGHTS_HPP_
