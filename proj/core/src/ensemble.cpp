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

#include "cxrlt/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cxrlt/error.hpp"

namespace cxrlt {
namespace {

// Column of `pred` holding global class c, or -1.
int column_of(const BranchPrediction& pred, int c) {
  const auto it = std::find(pred.class_indices.begin(), pred.class_indices.end(), c);
  return it == pred.class_indices.end() ? -1 : static_cast<int>(it - pred.class_indices.begin());
}

void require_cover(const BranchPrediction& pred, const std::vector<int>& classes,
                   std::string_view label) {
  if (static_cast<std::size_t>(pred.scores.cols()) != pred.class_indices.size()) {
    throw ShapeError(std::string(label) + " prediction has mismatched class columns");
  }
  for (int c : classes) {
    if (column_of(pred, c) < 0) {
      throw ConfigError(std::string(label) + " prediction does not cover class " + std::to_string(c));
    }
  }
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

ScoreMatrix combine(const BranchPrediction& all, const BranchPrediction& head,
                    const BranchPrediction& tail, const ClassPartition& partition,
                    const std::vector<std::string>& class_names) {
  const Eigen::Index n = all.scores.rows();
  if (head.scores.rows() != n || tail.scores.rows() != n) {
    throw ShapeError("branch predictions cover different sample counts");
  }
  for (const BranchPrediction* p : {&head, &tail}) {
    if (!all.sample_ids.empty() && !p->sample_ids.empty() && p->sample_ids != all.sample_ids) {
      throw ShapeError("branch predictions cover different samples");
    }
  }
  require_cover(all, partition.all_indices, "all");
  require_cover(head, partition.head_indices, "head");
  require_cover(tail, partition.tail_indices, "tail");

  const int num_classes = static_cast<int>(partition.all_indices.size());
  ScoreMatrix out;
  out.class_names = class_names;
  out.values.resize(n, num_classes);
  std::vector<char> in_head(static_cast<std::size_t>(num_classes), 0);
  std::vector<char> in_tail(static_cast<std::size_t>(num_classes), 0);
  for (int c : partition.head_indices) in_head[static_cast<std::size_t>(c)] = 1;
  for (int c : partition.tail_indices) in_tail[static_cast<std::size_t>(c)] = 1;

  for (int c = 0; c < num_classes; ++c) {
    const auto a = all.scores.col(column_of(all, c));
    if (c == partition.support_device_index) {
      const auto h = head.scores.col(column_of(head, c));
      const auto t = tail.scores.col(column_of(tail, c));
      for (Eigen::Index i = 0; i < n; ++i) {
        const double lo = std::min({a(i), h(i), t(i)});
        const double hi = std::max({a(i), h(i), t(i)});
        out.values(i, c) = std::clamp((a(i) + h(i) + t(i)) / 3.0, lo, hi);
      }
    } else if (in_head[static_cast<std::size_t>(c)]) {
      out.values.col(c) = (a + head.scores.col(column_of(head, c))) / 2.0;
    } else if (in_tail[static_cast<std::size_t>(c)]) {
      out.values.col(c) = (a + tail.scores.col(column_of(tail, c))) / 2.0;
    } else {
      throw ConfigError("class " + std::to_string(c) + " belongs to neither head nor tail");
    }
  }
  return out;
}

BranchPrediction predict_branch(const Checkpoint& checkpoint, const DatasetManifest& manifest,
                                const ImageStore& images, const ClassPartition& partition,
                                Branch branch) {
  const std::vector<int>& expected = branch_classes(partition, branch);
  if (checkpoint.class_indices.size() != expected.size()) {
    throw ConfigError("checkpoint emits " + std::to_string(checkpoint.class_indices.size()) +
                      " classes but the " + std::string(to_string(branch)) + " branch has " +
                      std::to_string(expected.size()));
  }
  if (checkpoint.class_indices != expected) {
    throw ConfigError("checkpoint classes differ from the " + std::string(to_string(branch)) +
                      " branch of the partition");
  }
  BranchPrediction pred;
  pred.branch = branch;
  pred.class_indices = checkpoint.class_indices;
  for (const Record& r : manifest.records()) pred.sample_ids.push_back(r.sample_id);
  pred.scores = sigmoid(predict_logits(checkpoint.model, manifest, images));
  return pred;
}

void save_branch_prediction(const std::filesystem::path& path, const BranchPrediction& prediction,
                            const std::vector<std::string>& class_names) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "sample_id";
  for (int c : prediction.class_indices) out << ',' << class_names.at(static_cast<std::size_t>(c));
  out << '\n';
  for (Eigen::Index i = 0; i < prediction.scores.rows(); ++i) {
    out << (static_cast<std::size_t>(i) < prediction.sample_ids.size()
                ? prediction.sample_ids[static_cast<std::size_t>(i)]
                : std::to_string(i));
    for (Eigen::Index k = 0; k < prediction.scores.cols(); ++k) {
      out << ',' << format_score(prediction.scores(i, k));
    }
    out << '\n';
  }
}

BranchPrediction load_branch_prediction(const std::filesystem::path& path,
                                        const std::vector<std::string>& class_names,
                                        Branch branch) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("sample_id");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "sample_id") throw SchemaError("sample_id");

  BranchPrediction pred;
  pred.branch = branch;
  for (std::size_t k = 1; k < header.size(); ++k) {
    const auto it = std::find(class_names.begin(), class_names.end(), header[k]);
    if (it == class_names.end()) throw ConfigError("unknown class column: " + header[k]);
    pred.class_indices.push_back(static_cast<int>(it - class_names.begin()));
  }
  std::vector<std::vector<double>> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw ParseError(row, "expected " + std::to_string(header.size()) + " cells");
    pred.sample_ids.push_back(cells[0]);
    std::vector<double> values;
    for (std::size_t k = 1; k < cells.size(); ++k) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[k], &used);
        if (used != cells[k].size() || !(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("range");
        values.push_back(v);
      } catch (const std::exception&) {
        throw ParseError(row, "score '" + cells[k] + "' is not a probability");
      }
    }
    rows.push_back(std::move(values));
  }
  pred.scores.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(pred.class_indices.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      pred.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  return pred;
}

std::string format_scores_csv(const std::vector<std::string>& sample_ids, const ScoreMatrix& scores) {
  std::ostringstream out;
  out << "sample_id";
  for (const std::string& name : scores.class_names) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < scores.values.rows(); ++i) {
    out << sample_ids.at(static_cast<std::size_t>(i));
    for (Eigen::Index c = 0; c < scores.values.cols(); ++c) out << ',' << format_score(scores.values(i, c));
    out << '\n';
  }
  return out.str();
}

}  // namespace cxrlt
