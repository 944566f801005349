// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace textact {

/// Dense row-major matrix. Rows are timesteps, columns are action dimensions.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw std::invalid_argument("Matrix: data size does not match shape");
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<const T> flat() const noexcept { return data_; }
  std::span<T> flat() noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Closed interval of raw action values for one dimension.
struct Bounds {
  double lo = 0.0;
  double hi = 1.0;

  double span() const noexcept { return hi - lo; }
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

/// Thrown for invalid configurations and shape/precondition violations.
class CodecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Chunk geometry and quantization range.
///
/// Integers live in [0, resolution]. Rounding is to nearest with ties away
/// from zero, which is what std::round does on every conforming platform.
struct CodecConfig {
  int horizon = 1;
  int dims = 1;
  int resolution = 1000;
  std::vector<Bounds> bounds;

  /// Throws CodecError unless H >= 1, D >= 1, B >= 2 and every bound is
  /// finite with lo < hi, one per dimension.
  void validate() const;

  std::size_t tokens() const noexcept {
    return static_cast<std::size_t>(horizon) * static_cast<std::size_t>(dims);
  }

  /// Largest reconstruction error for an in-bounds value of dimension d.
  double max_error(std::size_t d) const { return bounds.at(d).span() / (2.0 * resolution); }

  friend bool operator==(const CodecConfig&, const CodecConfig&) = default;
};

/// Continuous H x D action chunk in raw action units.
using ActionChunk = Matrix<double>;

struct QuantizedChunk {
  Matrix<std::int64_t> values;
  bool clamped = false;
};

enum class ParseErrorKind { TokenCountMismatch, NonNumericToken, EmptyOutput };

std::string_view to_string(ParseErrorKind kind) noexcept;

struct ParseError {
  ParseErrorKind kind;
  /// Index of the offending token; for count mismatches, the number of tokens seen.
  std::size_t token_index = 0;
  std::string token;

  std::string message() const;
};

/// Outcome of parsing model text: either a chunk or the reason it was rejected.
class ParseResult {
 public:
  ParseResult(QuantizedChunk chunk) : value_(std::move(chunk)) {}  // NOLINT
  ParseResult(ParseError error) : value_(std::move(error)) {}      // NOLINT

  bool ok() const noexcept { return std::holds_alternative<QuantizedChunk>(value_); }
  explicit operator bool() const noexcept { return ok(); }

  const QuantizedChunk& chunk() const { return std::get<QuantizedChunk>(value_); }
  const ParseError& error() const { return std::get<ParseError>(value_); }

 private:
  std::variant<QuantizedChunk, ParseError> value_;
};

/// Per-dimension min/max over every timestep of every chunk, widened by
/// padding_fraction * span on both sides. A constant dimension is widened by
/// kConstantDimEpsilon instead.
std::vector<Bounds> fit_bounds(std::span<const ActionChunk> dataset, double padding_fraction = 0.0);

inline constexpr double kConstantDimEpsilon = 1e-6;

QuantizedChunk quantize(const ActionChunk& chunk, const CodecConfig& cfg);
ActionChunk dequantize(const QuantizedChunk& q, const CodecConfig& cfg);

/// Scalar forms of the mapping, for one dimension.
std::int64_t quantize_value(double x, const Bounds& b, int resolution, bool* clamped = nullptr);
double dequantize_value(std::int64_t v, const Bounds& b, int resolution);

/// Timestep-major, single-space separated, no trailing whitespace.
std::string encode_text(const QuantizedChunk& q);

/// Tolerant parse of model output. Never throws on malformed text.
///
/// Tokens are split on runs of ASCII whitespace. A token may carry one leading
/// '-' (or U+2212); it must otherwise be all decimal digits. Values outside
/// [0, B] are clamped and the chunk is flagged. Exactly H*D tokens are needed.
ParseResult parse_text(std::string_view text, const CodecConfig& cfg);

/// Convenience: quantize then encode.
std::string chunk_to_text(const ActionChunk& chunk, const CodecConfig& cfg);

/// Bounds file: {"dims": D, "bounds": [[lo, hi], ...], "resolution": B, "horizon": H}.
std::string codec_config_to_json(const CodecConfig& cfg);
CodecConfig codec_config_from_json(std::string_view text);
void save_codec_config(const CodecConfig& cfg, const std::filesystem::path& path);
CodecConfig load_codec_config(const std::filesystem::path& path);

}  // namespace textact
