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

#ifndef CXRLT_DATAKIT_HPP_
#define CXRLT_DATAKIT_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cxrlt {

inline constexpr int kReferenceNumClasses = 19;
inline constexpr int kReferenceHeadSize = 9;

enum class Race { kWhite, kBlack, kHispanic, kAsian, kOther };
enum class Gender { kMale, kFemale };
enum class Split { kTrain, kVal, kTest };
enum class Attribute { kRace, kGender };

std::string_view to_string(Race race);
std::string_view to_string(Gender gender);
std::string_view to_string(Split split);
std::string_view to_string(Attribute attribute);
std::optional<Race> parse_race(std::string_view text);
std::optional<Gender> parse_gender(std::string_view text);
std::optional<Split> parse_split(std::string_view text);
std::optional<Attribute> parse_attribute(std::string_view text);

struct Record {
  std::string sample_id;
  std::string image_ref;
  std::vector<std::uint8_t> labels;
  Race race = Race::kOther;
  Gender gender = Gender::kMale;
  Split split = Split::kTrain;
  // Empty for original records; "dup:<source id>" for oversampled copies.
  std::string provenance;
};

// N x C binary ground truth. Column-major so a class column is contiguous.
struct LabelMatrix {
  std::vector<std::string> class_names;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> values;
};

// N x C probabilities in [0, 1], column-major.
struct ScoreMatrix {
  std::vector<std::string> class_names;
  Eigen::MatrixXd values;
};

class DatasetManifest {
 public:
  DatasetManifest() = default;
  DatasetManifest(std::vector<std::string> class_names, std::vector<Record> records);

  const std::vector<std::string>& class_names() const { return class_names_; }
  const std::vector<Record>& records() const { return records_; }
  int num_classes() const { return static_cast<int>(class_names_.size()); }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // Throws ConfigError on duplicate ids or label vectors of the wrong length
  // or with entries outside {0, 1}.
  void validate() const;

  DatasetManifest select(Split split) const;
  std::optional<std::size_t> find(std::string_view sample_id) const;
  int class_index(std::string_view name) const;  // -1 when absent
  LabelMatrix label_matrix() const;
  bool has_provenance() const;

 private:
  std::vector<std::string> class_names_;
  std::vector<Record> records_;
};

struct LoadOptions {
  // Unknown race strings throw ParseError when set, map to Other otherwise.
  bool strict_demographics = true;
};

// Columns: sample_id, image_ref, split, race, gender, <C label columns>,
// and an optional trailing provenance column.
DatasetManifest load_manifest(const std::filesystem::path& path,
                              const LoadOptions& options = {});
DatasetManifest parse_manifest(std::string_view csv_text,
                               const LoadOptions& options = {});
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
std::string format_manifest(const DatasetManifest& manifest);

// Positive count per class over the records of `split`.
std::vector<long> class_counts(const DatasetManifest& manifest, Split split);
// Positive count per class over every record regardless of split.
std::vector<long> class_counts(const DatasetManifest& manifest);

struct ClassPartition {
  std::vector<int> head_indices;
  std::vector<int> tail_indices;
  std::vector<int> all_indices;
  int support_device_index = -1;
};

// Default head size for C classes: ceil(C * 9 / 19), 9 at C = 19.
int default_head_size(int num_classes);

// Head = the `head_size` most frequent classes (ties -> lower index), tail =
// the rest plus the support device class. Index sets are sorted ascending.
ClassPartition partition_classes(const std::vector<long>& counts,
                                 const std::vector<std::string>& class_names,
                                 std::string_view support_device_name,
                                 std::optional<int> head_size = std::nullopt);

// Throws ConfigError if the partition invariants do not hold.
void validate_partition(const ClassPartition& partition, int num_classes);

enum class Branch { kHead, kTail, kAll };

std::string_view to_string(Branch branch);
std::optional<Branch> parse_branch(std::string_view text);

// Global class indices a branch is trained on.
const std::vector<int>& branch_classes(const ClassPartition& partition, Branch branch);

}  // namespace cxrlt

#endif  // CXRLT_DATAKIT_HPP_
