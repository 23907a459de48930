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

#ifndef CXRLT_ERROR_HPP_
#define CXRLT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace cxrlt {

// Base of every error thrown by the library. The CLI maps subclasses onto
// exit codes: configuration-like errors -> 2, NumericalError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A required column is missing or the header is malformed.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& column)
      : Error("missing required column: " + column), column_(column) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
  // 1-based data row (the header is row 0).
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A metric is undefined on the given input (no positives, single class...).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cxrlt

#endif  // CXRLT_ERROR_HPP_
