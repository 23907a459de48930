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

#include "cxrlt/weights.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cxrlt/error.hpp"

namespace cxrlt {
namespace {

template <typename T>
void append_le(std::string& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.append(bytes.data(), bytes.size());
}

template <typename T>
T read_le(const char* p) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

void save_weights(const std::filesystem::path& dir, const std::vector<ConstTensorRef>& tensors,
                  std::string_view metadata_json, WeightDtype dtype) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  nlohmann::json metadata;
  try {
    metadata = nlohmann::json::parse(metadata_json);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("weight metadata is not valid JSON: ") + e.what());
  }

  std::string blob;
  nlohmann::json entries = nlohmann::json::array();
  for (const ConstTensorRef& ref : tensors) {
    const Tensor& t = *ref.tensor;
    entries.push_back({{"name", ref.name},
                       {"shape", {t.rows(), t.cols()}},
                       {"dtype", dtype == WeightDtype::kFloat32 ? "float32" : "float64"},
                       {"offset", blob.size()}});
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      if (dtype == WeightDtype::kFloat32) {
        append_le<float>(blob, static_cast<float>(t.data()[i]));
      } else {
        append_le<double>(blob, t.data()[i]);
      }
    }
  }
  const nlohmann::json index = {{"format", "cxrlt-weights"},
                                {"version", 1},
                                {"blob", kWeightBlobFile},
                                {"tensors", entries},
                                {"metadata", metadata}};

  std::ofstream blob_out(dir / kWeightBlobFile, std::ios::binary | std::ios::trunc);
  blob_out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  std::ofstream index_out(dir / kWeightIndexFile, std::ios::binary | std::ios::trunc);
  index_out << index.dump(2) << '\n';
  if (!blob_out || !index_out) throw IoError("failed writing weights to " + dir.string());
}

WeightBundle load_weights(const std::filesystem::path& dir) {
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(read_file(dir / kWeightIndexFile));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("invalid weight index in " + dir.string() + ": " + e.what());
  }
  const std::string blob = read_file(dir / index.value("blob", std::string(kWeightBlobFile)));

  WeightBundle bundle;
  if (index.contains("metadata")) bundle.metadata_json = index["metadata"].dump();
  try {
    for (const auto& entry : index.at("tensors")) {
      const std::string name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<std::vector<std::int64_t>>();
      const std::string dtype = entry.at("dtype").get<std::string>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      std::int64_t rows = 1, cols = 1;
      if (shape.size() == 1) {
        cols = shape[0];
      } else if (shape.size() == 2) {
        rows = shape[0];
        cols = shape[1];
      } else {
        // Higher-rank tensors are flattened to (first dim) x (rest).
        rows = shape.empty() ? 1 : shape[0];
        for (std::size_t i = 1; i < shape.size(); ++i) cols *= shape[i];
      }
      const std::size_t width = dtype == "float32" ? 4 : dtype == "float64" ? 8 : 0;
      if (width == 0) throw IoError("unsupported dtype '" + dtype + "' for " + name);
      const std::size_t count = static_cast<std::size_t>(rows * cols);
      if (offset + count * width > blob.size()) throw IoError("tensor " + name + " overruns the blob");
      Tensor t(rows, cols);
      const char* p = blob.data() + offset;
      for (std::size_t i = 0; i < count; ++i) {
        t.data()[i] = width == 4 ? static_cast<double>(read_le<float>(p + 4 * i))
                                 : read_le<double>(p + 8 * i);
      }
      bundle.tensors.emplace(name, std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed weight index in " + dir.string() + ": " + e.what());
  }
  return bundle;
}

void assign_weights(const std::vector<TensorRef>& targets, const WeightBundle& bundle,
                    bool require_all) {
  for (const TensorRef& ref : targets) {
    const auto it = bundle.tensors.find(ref.name);
    if (it == bundle.tensors.end()) {
      if (require_all) throw ConfigError("weight manifest lacks tensor " + ref.name);
      continue;
    }
    if (it->second.rows() != ref.tensor->rows() || it->second.cols() != ref.tensor->cols()) {
      throw ShapeError("tensor " + ref.name + " has shape " + std::to_string(it->second.rows()) +
                       "x" + std::to_string(it->second.cols()) + ", expected " +
                       std::to_string(ref.tensor->rows()) + "x" +
                       std::to_string(ref.tensor->cols()));
    }
    *ref.tensor = it->second;
  }
}

}  // namespace cxrlt
