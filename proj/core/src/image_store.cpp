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

#include "cxrlt/image_store.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "cxrlt/error.hpp"

namespace cxrlt {
namespace {

constexpr std::array<char, 8> kMagic = {'C', 'X', 'R', 'I', 'M', 'G', 'S', '1'};

template <typename T>
void write_le(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!in) throw IoError("truncated image store");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

bool ImageStore::contains(std::string_view id) const {
  return index_.find(std::string(id)) != index_.end();
}

void ImageStore::add(const std::string& id, const Image& image) {
  if (image.rows() != image_size_ || image.cols() != image_size_) {
    throw ConfigError("image " + id + " is not " + std::to_string(image_size_) + "x" +
                      std::to_string(image_size_));
  }
  if (!index_.emplace(id, ids_.size()).second) {
    throw ConfigError("duplicate image id: " + id);
  }
  ids_.push_back(id);
  const std::size_t n = static_cast<std::size_t>(image_size_) * static_cast<std::size_t>(image_size_);
  pixels_.reserve(pixels_.size() + n);
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    pixels_.push_back(static_cast<float>(std::clamp(image.data()[i], 0.0, 1.0)));
  }
}

std::size_t ImageStore::offset_of(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) throw ConfigError("image not found: " + std::string(id));
  return it->second * static_cast<std::size_t>(image_size_) * static_cast<std::size_t>(image_size_);
}

std::span<const float> ImageStore::raw(std::string_view id) const {
  const std::size_t n = static_cast<std::size_t>(image_size_) * static_cast<std::size_t>(image_size_);
  return {pixels_.data() + offset_of(id), n};
}

Image ImageStore::get(std::string_view id) const {
  const auto values = raw(id);
  Image image(image_size_, image_size_);
  for (std::size_t i = 0; i < values.size(); ++i) image.data()[i] = values[i];
  return image;
}

Image ImageStore::resolve(std::string_view image_ref) const {
  constexpr std::string_view prefix = "store:";
  if (image_ref.starts_with(prefix)) image_ref.remove_prefix(prefix.size());
  return get(image_ref);
}

void ImageStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write image store: " + path.string());
  out.write(kMagic.data(), kMagic.size());
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(image_size_));
  write_le<std::uint64_t>(out, ids_.size());
  const std::size_t n = static_cast<std::size_t>(image_size_) * static_cast<std::size_t>(image_size_);
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ids_[i].size()));
    out.write(ids_[i].data(), static_cast<std::streamsize>(ids_[i].size()));
    for (std::size_t k = 0; k < n; ++k) write_le<float>(out, pixels_[i * n + k]);
  }
  if (!out) throw IoError("failed writing image store: " + path.string());
}

ImageStore ImageStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image store: " + path.string());
  std::array<char, 8> magic;
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError("not an image store: " + path.string());
  const auto size = read_le<std::uint32_t>(in);
  const auto count = read_le<std::uint64_t>(in);
  ImageStore store(static_cast<int>(size));
  const std::size_t n = static_cast<std::size_t>(size) * size;
  store.pixels_.reserve(n * count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = read_le<std::uint32_t>(in);
    std::string id(len, '\0');
    in.read(id.data(), len);
    if (!in) throw IoError("truncated image store");
    if (!store.index_.emplace(id, store.ids_.size()).second) {
      throw IoError("duplicate image id in store: " + id);
    }
    store.ids_.push_back(std::move(id));
    for (std::size_t k = 0; k < n; ++k) store.pixels_.push_back(read_le<float>(in));
  }
  return store;
}

}  // namespace cxrlt
