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

#include "cxrlt/datakit.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "cxrlt/error.hpp"

namespace cxrlt {
namespace {

constexpr std::string_view kFixedColumns[] = {"sample_id", "image_ref", "split", "race",
                                              "gender"};
constexpr std::string_view kProvenanceColumn = "provenance";

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && (text.back() == '\r' || text.back() == ' ')) text.remove_suffix(1);
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  return text;
}

// Splits one CSV line; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::string(trim(current)));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::string(trim(current)));
  return fields;
}

std::string quote_if_needed(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string_view to_string(Race race) {
  switch (race) {
    case Race::kWhite: return "White";
    case Race::kBlack: return "Black";
    case Race::kHispanic: return "Hispanic";
    case Race::kAsian: return "Asian";
    case Race::kOther: return "Other";
  }
  return "Other";
}

std::string_view to_string(Gender gender) {
  return gender == Gender::kMale ? "Male" : "Female";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

std::string_view to_string(Attribute attribute) {
  return attribute == Attribute::kRace ? "race" : "gender";
}

std::optional<Race> parse_race(std::string_view text) {
  const std::string key = lower(trim(text));
  if (key == "white") return Race::kWhite;
  if (key == "black") return Race::kBlack;
  if (key == "hispanic") return Race::kHispanic;
  if (key == "asian") return Race::kAsian;
  if (key == "other") return Race::kOther;
  return std::nullopt;
}

std::optional<Gender> parse_gender(std::string_view text) {
  const std::string key = lower(trim(text));
  if (key == "male" || key == "m") return Gender::kMale;
  if (key == "female" || key == "f") return Gender::kFemale;
  return std::nullopt;
}

std::optional<Split> parse_split(std::string_view text) {
  const std::string key = lower(trim(text));
  if (key == "train") return Split::kTrain;
  if (key == "val" || key == "validation") return Split::kVal;
  if (key == "test") return Split::kTest;
  return std::nullopt;
}

std::optional<Attribute> parse_attribute(std::string_view text) {
  const std::string key = lower(trim(text));
  if (key == "race") return Attribute::kRace;
  if (key == "gender") return Attribute::kGender;
  return std::nullopt;
}

std::optional<Branch> parse_branch(std::string_view text) {
  const std::string key = lower(trim(text));
  if (key == "head") return Branch::kHead;
  if (key == "tail") return Branch::kTail;
  if (key == "all") return Branch::kAll;
  return std::nullopt;
}

std::string_view to_string(Branch branch) {
  switch (branch) {
    case Branch::kHead: return "head";
    case Branch::kTail: return "tail";
    case Branch::kAll: return "all";
  }
  return "all";
}

DatasetManifest::DatasetManifest(std::vector<std::string> class_names,
                                 std::vector<Record> records)
    : class_names_(std::move(class_names)), records_(std::move(records)) {
  validate();
}

void DatasetManifest::validate() const {
  std::unordered_set<std::string_view> seen;
  seen.reserve(records_.size());
  for (const Record& r : records_) {
    if (!seen.insert(r.sample_id).second) {
      throw ConfigError("duplicate sample_id: " + r.sample_id);
    }
    if (r.labels.size() != class_names_.size()) {
      throw ConfigError("sample " + r.sample_id + " has " + std::to_string(r.labels.size()) +
                        " labels, expected " + std::to_string(class_names_.size()));
    }
    for (std::uint8_t v : r.labels) {
      if (v > 1) throw ConfigError("sample " + r.sample_id + " has a non-binary label");
    }
  }
}

DatasetManifest DatasetManifest::select(Split split) const {
  std::vector<Record> out;
  for (const Record& r : records_) {
    if (r.split == split) out.push_back(r);
  }
  DatasetManifest m;
  m.class_names_ = class_names_;
  m.records_ = std::move(out);
  return m;
}

std::optional<std::size_t> DatasetManifest::find(std::string_view sample_id) const {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].sample_id == sample_id) return i;
  }
  return std::nullopt;
}

int DatasetManifest::class_index(std::string_view name) const {
  for (std::size_t c = 0; c < class_names_.size(); ++c) {
    if (class_names_[c] == name) return static_cast<int>(c);
  }
  return -1;
}

LabelMatrix DatasetManifest::label_matrix() const {
  LabelMatrix m;
  m.class_names = class_names_;
  m.values.resize(static_cast<Eigen::Index>(records_.size()),
                  static_cast<Eigen::Index>(class_names_.size()));
  for (std::size_t i = 0; i < records_.size(); ++i) {
    for (std::size_t c = 0; c < class_names_.size(); ++c) {
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          records_[i].labels[c];
    }
  }
  return m;
}

bool DatasetManifest::has_provenance() const {
  return std::any_of(records_.begin(), records_.end(),
                     [](const Record& r) { return !r.provenance.empty(); });
}

DatasetManifest parse_manifest(std::string_view csv_text, const LoadOptions& options) {
  std::istringstream in{std::string(csv_text)};
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("sample_id");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  const std::vector<std::string> header = split_csv_line(line);

  for (std::size_t i = 0; i < std::size(kFixedColumns); ++i) {
    const auto it = std::find(header.begin(), header.end(), kFixedColumns[i]);
    if (it == header.end()) throw SchemaError(std::string(kFixedColumns[i]));
    if (static_cast<std::size_t>(it - header.begin()) != i) {
      throw SchemaError(std::string(kFixedColumns[i]) + " (expected at position " +
                        std::to_string(i) + ")");
    }
  }
  const bool has_provenance = !header.empty() && header.back() == kProvenanceColumn;
  const std::size_t label_end = header.size() - (has_provenance ? 1 : 0);
  const std::size_t fixed = std::size(kFixedColumns);
  if (label_end <= fixed) throw SchemaError("label columns");
  std::vector<std::string> class_names(header.begin() + static_cast<std::ptrdiff_t>(fixed),
                                       header.begin() + static_cast<std::ptrdiff_t>(label_end));

  std::vector<Record> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw ParseError(row, "expected " + std::to_string(header.size()) + " fields, got " +
                                std::to_string(f.size()));
    }
    Record r;
    r.sample_id = f[0];
    if (r.sample_id.empty()) throw ParseError(row, "empty sample_id");
    r.image_ref = f[1];
    const auto split = parse_split(f[2]);
    if (!split) throw ParseError(row, "invalid split '" + f[2] + "'");
    r.split = *split;
    const auto race = parse_race(f[3]);
    if (!race && options.strict_demographics) {
      throw ParseError(row, "unknown race '" + f[3] + "'");
    }
    r.race = race.value_or(Race::kOther);
    const auto gender = parse_gender(f[4]);
    if (!gender) throw ParseError(row, "unknown gender '" + f[4] + "'");
    r.gender = *gender;
    r.labels.reserve(class_names.size());
    for (std::size_t c = fixed; c < label_end; ++c) {
      if (f[c] == "0") {
        r.labels.push_back(0);
      } else if (f[c] == "1") {
        r.labels.push_back(1);
      } else {
        throw ParseError(row, "non-binary label '" + f[c] + "' in column " + header[c]);
      }
    }
    if (has_provenance) r.provenance = f.back();
    records.push_back(std::move(r));
  }
  return DatasetManifest(std::move(class_names), std::move(records));
}

DatasetManifest load_manifest(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), options);
}

std::string format_manifest(const DatasetManifest& manifest) {
  const bool provenance = manifest.has_provenance();
  std::ostringstream out;
  for (std::string_view col : kFixedColumns) out << col << ',';
  for (std::size_t c = 0; c < manifest.class_names().size(); ++c) {
    if (c) out << ',';
    out << quote_if_needed(manifest.class_names()[c]);
  }
  if (provenance) out << ',' << kProvenanceColumn;
  out << '\n';
  for (const Record& r : manifest.records()) {
    out << quote_if_needed(r.sample_id) << ',' << quote_if_needed(r.image_ref) << ','
        << to_string(r.split) << ',' << to_string(r.race) << ',' << to_string(r.gender);
    for (std::uint8_t v : r.labels) out << ',' << static_cast<int>(v);
    if (provenance) out << ',' << quote_if_needed(r.provenance);
    out << '\n';
  }
  return out.str();
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << format_manifest(manifest);
}

std::vector<long> class_counts(const DatasetManifest& manifest, Split split) {
  std::vector<long> counts(static_cast<std::size_t>(manifest.num_classes()), 0);
  bool any = false;
  for (const Record& r : manifest.records()) {
    if (r.split != split) continue;
    any = true;
    for (std::size_t c = 0; c < counts.size(); ++c) counts[c] += r.labels[c];
  }
  if (!any) throw ConfigError("no records in split " + std::string(to_string(split)));
  return counts;
}

std::vector<long> class_counts(const DatasetManifest& manifest) {
  if (manifest.empty()) throw ConfigError("empty manifest");
  std::vector<long> counts(static_cast<std::size_t>(manifest.num_classes()), 0);
  for (const Record& r : manifest.records()) {
    for (std::size_t c = 0; c < counts.size(); ++c) counts[c] += r.labels[c];
  }
  return counts;
}

int default_head_size(int num_classes) {
  return (num_classes * kReferenceHeadSize + kReferenceNumClasses - 1) / kReferenceNumClasses;
}

ClassPartition partition_classes(const std::vector<long>& counts,
                                 const std::vector<std::string>& class_names,
                                 std::string_view support_device_name,
                                 std::optional<int> head_size) {
  const int num_classes = static_cast<int>(counts.size());
  if (class_names.size() != counts.size()) {
    throw ConfigError("class_names and counts differ in length");
  }
  if (num_classes < 2) throw ConfigError("partition needs at least two classes");
  const int head = head_size.value_or(default_head_size(num_classes));
  if (head < 1 || head >= num_classes) {
    throw ConfigError("head size " + std::to_string(head) + " out of range for " +
                      std::to_string(num_classes) + " classes");
  }
  const auto support_it = std::find(class_names.begin(), class_names.end(), support_device_name);
  if (support_it == class_names.end()) {
    throw ConfigError("support device class '" + std::string(support_device_name) +
                      "' not found");
  }
  const int support = static_cast<int>(support_it - class_names.begin());

  std::vector<int> order(static_cast<std::size_t>(num_classes));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return counts[static_cast<std::size_t>(a)] > counts[static_cast<std::size_t>(b)];
  });

  ClassPartition p;
  p.support_device_index = support;
  p.head_indices.assign(order.begin(), order.begin() + head);
  p.tail_indices.assign(order.begin() + head, order.end());
  if (std::find(p.head_indices.begin(), p.head_indices.end(), support) == p.head_indices.end()) {
    throw ConfigError("support device class '" + std::string(support_device_name) +
                      "' is not among the " + std::to_string(head) + " most frequent classes");
  }
  p.tail_indices.push_back(support);
  std::sort(p.head_indices.begin(), p.head_indices.end());
  std::sort(p.tail_indices.begin(), p.tail_indices.end());
  p.all_indices.resize(static_cast<std::size_t>(num_classes));
  std::iota(p.all_indices.begin(), p.all_indices.end(), 0);
  return p;
}

void validate_partition(const ClassPartition& p, int num_classes) {
  auto in = [](const std::vector<int>& v, int x) {
    return std::find(v.begin(), v.end(), x) != v.end();
  };
  if (static_cast<int>(p.all_indices.size()) != num_classes) {
    throw ConfigError("partition covers " + std::to_string(p.all_indices.size()) +
                      " classes, expected " + std::to_string(num_classes));
  }
  if (!in(p.head_indices, p.support_device_index) ||
      !in(p.tail_indices, p.support_device_index)) {
    throw ConfigError("support device must belong to both head and tail");
  }
  int shared = 0;
  for (int c : p.all_indices) {
    const bool h = in(p.head_indices, c);
    const bool t = in(p.tail_indices, c);
    if (!h && !t) throw ConfigError("class " + std::to_string(c) + " is in neither branch");
    shared += (h && t);
  }
  if (shared != 1) throw ConfigError("head and tail must share exactly one class");
}

const std::vector<int>& branch_classes(const ClassPartition& partition, Branch branch) {
  switch (branch) {
    case Branch::kHead: return partition.head_indices;
    case Branch::kTail: return partition.tail_indices;
    case Branch::kAll: return partition.all_indices;
  }
  return partition.all_indices;
}

}  // namespace cxrlt
