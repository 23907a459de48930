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

#ifndef CXRLT_IMAGE_STORE_HPP_
#define CXRLT_IMAGE_STORE_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cxrlt/tensor.hpp"

namespace cxrlt {

// Square single-channel float32 images keyed by sample id, kept in one
// binary container. Layout (little-endian):
//   "CXRIMGS1" | u32 image_size | u64 count |
//   count x ( u32 id_length | id bytes | image_size^2 float32 row-major )
// Reads are const and safe from multiple threads.
class ImageStore {
 public:
  ImageStore() = default;
  explicit ImageStore(int image_size) : image_size_(image_size) {}

  static ImageStore load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  int image_size() const { return image_size_; }
  std::size_t size() const { return ids_.size(); }
  bool contains(std::string_view id) const;
  const std::vector<std::string>& ids() const { return ids_; }

  // Values are clamped into [0, 1]. Throws ConfigError on duplicates or
  // size mismatch.
  void add(const std::string& id, const Image& image);
  Image get(std::string_view id) const;
  std::span<const float> raw(std::string_view id) const;

  // Handle written into the manifest's image_ref column.
  static std::string ref_for(std::string_view id) { return "store:" + std::string(id); }
  // Resolves an image_ref ("store:<id>") or a bare id.
  Image resolve(std::string_view image_ref) const;

 private:
  std::size_t offset_of(std::string_view id) const;

  int image_size_ = 0;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> pixels_;
};

}  // namespace cxrlt

#endif  // CXRLT_IMAGE_STORE_HPP_
