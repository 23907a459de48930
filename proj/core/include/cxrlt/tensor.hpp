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

#ifndef CXRLT_TENSOR_HPP_
#define CXRLT_TENSOR_HPP_

#include <Eigen/Core>

#include <string>
#include <utility>
#include <vector>

namespace cxrlt {

// Row-major dense matrix; every parameter, activation and gradient is one.
using Tensor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Single-channel image, rows x cols, values nominally in [0, 1].
using Image = Tensor;

// Named non-owning view used to walk parameter sets generically.
struct TensorRef {
  std::string name;
  Tensor* tensor;
};

struct ConstTensorRef {
  std::string name;
  const Tensor* tensor;
};

}  // namespace cxrlt

#endif  // CXRLT_TENSOR_HPP_
