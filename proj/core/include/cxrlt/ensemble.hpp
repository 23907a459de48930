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

#ifndef CXRLT_ENSEMBLE_HPP_
#define CXRLT_ENSEMBLE_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "cxrlt/datakit.hpp"
#include "cxrlt/image_store.hpp"
#include "cxrlt/training.hpp"

namespace cxrlt {

struct BranchPrediction {
  Branch branch = Branch::kAll;
  std::vector<std::string> sample_ids;  // may be empty when unknown
  std::vector<int> class_indices;       // global class per column
  Eigen::MatrixXd scores;               // N x |class_indices|, in [0, 1]
};

// Merges the three branches into N x C probabilities:
//   head class:     (all + head) / 2
//   tail class:     (all + tail) / 2
//   support device: (all + head + tail) / 3
// Classes are looked up by global index, so a branch may cover more classes
// than its partition set (feeding `all` into every slot returns `all`).
// Throws ShapeError on sample mismatches and ConfigError when a branch does
// not cover its partition set.
ScoreMatrix combine(const BranchPrediction& all, const BranchPrediction& head,
                    const BranchPrediction& tail, const ClassPartition& partition,
                    const std::vector<std::string>& class_names = {});

// Sigmoid scores of the checkpoint over every record of `manifest`. Throws
// ConfigError when the checkpoint was not trained on the branch's classes.
BranchPrediction predict_branch(const Checkpoint& checkpoint, const DatasetManifest& manifest,
                                const ImageStore& images, const ClassPartition& partition,
                                Branch branch);

// CSV with a sample_id column and one column per covered class, named after
// the class.
void save_branch_prediction(const std::filesystem::path& path, const BranchPrediction& prediction,
                            const std::vector<std::string>& class_names);
BranchPrediction load_branch_prediction(const std::filesystem::path& path,
                                        const std::vector<std::string>& class_names,
                                        Branch branch);

// Writes a full N x C score matrix as CSV (sample_id + every class).
std::string format_scores_csv(const std::vector<std::string>& sample_ids, const ScoreMatrix& scores);

}  // namespace cxrlt

#endif  // CXRLT_ENSEMBLE_HPP_
