// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include "textact/codec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace textact {
namespace {

using json = nlohmann::json;

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

constexpr std::string_view kUnicodeMinus = "\xE2\x88\x92";

// Numeric token value, saturated at `ceiling + 1` so arbitrarily long digit
// strings cannot overflow.
struct TokenValue {
  bool numeric = false;
  bool negative = false;
  std::int64_t magnitude = 0;
};

TokenValue read_token(std::string_view token, std::int64_t ceiling) {
  TokenValue out;
  if (token.starts_with('-')) {
    out.negative = true;
    token.remove_prefix(1);
  } else if (token.starts_with(kUnicodeMinus)) {
    out.negative = true;
    token.remove_prefix(kUnicodeMinus.size());
  }
  if (token.empty()) return out;
  for (char c : token) {
    if (!is_digit(c)) return out;
    if (out.magnitude <= ceiling) out.magnitude = out.magnitude * 10 + (c - '0');
  }
  out.numeric = true;
  return out;
}

void check_shape(const CodecConfig& cfg, std::size_t rows, std::size_t cols) {
  if (rows != static_cast<std::size_t>(cfg.horizon) || cols != static_cast<std::size_t>(cfg.dims)) {
    std::ostringstream os;
    os << "chunk shape " << rows << "x" << cols << " does not match codec " << cfg.horizon << "x"
       << cfg.dims;
    throw CodecError(os.str());
  }
}

}  // namespace

void CodecConfig::validate() const {
  if (horizon < 1) throw CodecError("horizon must be >= 1");
  if (dims < 1) throw CodecError("dims must be >= 1");
  if (resolution < 2) throw CodecError("resolution must be >= 2");
  if (bounds.size() != static_cast<std::size_t>(dims)) {
    throw CodecError("expected " + std::to_string(dims) + " bounds, got " +
                     std::to_string(bounds.size()));
  }
  for (std::size_t d = 0; d < bounds.size(); ++d) {
    const auto& b = bounds[d];
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi)) {
      throw CodecError("bounds for dim " + std::to_string(d) + " are not finite");
    }
    if (!(b.lo < b.hi)) {
      throw CodecError("bounds for dim " + std::to_string(d) + " need lo < hi");
    }
  }
}

std::string_view to_string(ParseErrorKind kind) noexcept {
  switch (kind) {
    case ParseErrorKind::TokenCountMismatch: return "TokenCountMismatch";
    case ParseErrorKind::NonNumericToken: return "NonNumericToken";
    case ParseErrorKind::EmptyOutput: return "EmptyOutput";
  }
  return "Unknown";
}

std::string ParseError::message() const {
  std::ostringstream os;
  os << to_string(kind);
  switch (kind) {
    case ParseErrorKind::TokenCountMismatch: os << ": got " << token_index << " tokens"; break;
    case ParseErrorKind::NonNumericToken: os << " at index " << token_index << ": '" << token << "'"; break;
    case ParseErrorKind::EmptyOutput: break;
  }
  return os.str();
}

std::vector<Bounds> fit_bounds(std::span<const ActionChunk> dataset, double padding_fraction) {
  if (dataset.empty()) throw CodecError("fit_bounds: empty dataset");
  if (!(padding_fraction >= 0.0) || !std::isfinite(padding_fraction)) {
    throw CodecError("fit_bounds: padding_fraction must be finite and >= 0");
  }
  const std::size_t dims = dataset.front().cols();
  if (dims == 0) throw CodecError("fit_bounds: chunks have zero dimensions");

  std::vector<double> lo(dims, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dims, -std::numeric_limits<double>::infinity());
  bool any_row = false;
  for (const auto& chunk : dataset) {
    if (chunk.cols() != dims) throw CodecError("fit_bounds: chunks disagree on D");
    for (std::size_t t = 0; t < chunk.rows(); ++t) {
      for (std::size_t d = 0; d < dims; ++d) {
        const double v = chunk(t, d);
        if (!std::isfinite(v)) throw CodecError("fit_bounds: non-finite action value");
        lo[d] = std::min(lo[d], v);
        hi[d] = std::max(hi[d], v);
      }
      any_row = true;
    }
  }
  if (!any_row) throw CodecError("fit_bounds: dataset has no timesteps");

  std::vector<Bounds> out(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    const double span = hi[d] - lo[d];
    if (span == 0.0) {
      out[d] = {lo[d] - kConstantDimEpsilon, hi[d] + kConstantDimEpsilon};
    } else {
      out[d] = {lo[d] - padding_fraction * span, hi[d] + padding_fraction * span};
    }
  }
  return out;
}

std::int64_t quantize_value(double x, const Bounds& b, int resolution, bool* clamped) {
  if (!std::isfinite(x)) throw CodecError("quantize: non-finite action value");
  const double scaled = (x - b.lo) / (b.hi - b.lo) * resolution;
  const double r = std::round(scaled);
  if (r < 0.0) {
    if (clamped) *clamped = true;
    return 0;
  }
  if (r > resolution) {
    if (clamped) *clamped = true;
    return resolution;
  }
  return static_cast<std::int64_t>(r);
}

double dequantize_value(std::int64_t v, const Bounds& b, int resolution) {
  return b.lo + (static_cast<double>(v) / resolution) * (b.hi - b.lo);
}

QuantizedChunk quantize(const ActionChunk& chunk, const CodecConfig& cfg) {
  check_shape(cfg, chunk.rows(), chunk.cols());
  QuantizedChunk q{Matrix<std::int64_t>(chunk.rows(), chunk.cols()), false};
  for (std::size_t t = 0; t < chunk.rows(); ++t) {
    for (std::size_t d = 0; d < chunk.cols(); ++d) {
      q.values(t, d) = quantize_value(chunk(t, d), cfg.bounds[d], cfg.resolution, &q.clamped);
    }
  }
  return q;
}

ActionChunk dequantize(const QuantizedChunk& q, const CodecConfig& cfg) {
  check_shape(cfg, q.values.rows(), q.values.cols());
  ActionChunk out(q.values.rows(), q.values.cols());
  for (std::size_t t = 0; t < out.rows(); ++t) {
    for (std::size_t d = 0; d < out.cols(); ++d) {
      const std::int64_t v = q.values(t, d);
      if (v < 0 || v > cfg.resolution) throw CodecError("dequantize: value outside [0, B]");
      out(t, d) = dequantize_value(v, cfg.bounds[d], cfg.resolution);
    }
  }
  return out;
}

std::string encode_text(const QuantizedChunk& q) {
  std::string out;
  out.reserve(q.values.size() * 5);
  bool first = true;
  for (std::int64_t v : q.values.flat()) {
    if (!first) out.push_back(' ');
    out += std::to_string(v);
    first = false;
  }
  return out;
}

ParseResult parse_text(std::string_view text, const CodecConfig& cfg) {
  std::vector<std::int64_t> values;
  values.reserve(cfg.tokens());
  bool clamped = false;
  std::size_t index = 0;

  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && is_space(text[pos])) ++pos;
    if (pos >= text.size()) break;
    const std::size_t start = pos;
    while (pos < text.size() && !is_space(text[pos])) ++pos;
    const std::string_view token = text.substr(start, pos - start);

    const TokenValue tv = read_token(token, cfg.resolution);
    if (!tv.numeric) {
      return ParseError{ParseErrorKind::NonNumericToken, index, std::string(token)};
    }
    std::int64_t v = tv.negative ? -tv.magnitude : tv.magnitude;
    if (v < 0) {
      v = 0;
      clamped = true;
    } else if (v > cfg.resolution) {
      v = cfg.resolution;
      clamped = true;
    }
    values.push_back(v);
    ++index;
  }

  if (index == 0) return ParseError{ParseErrorKind::EmptyOutput, 0, {}};
  if (index != cfg.tokens()) {
    return ParseError{ParseErrorKind::TokenCountMismatch, index, {}};
  }
  return QuantizedChunk{Matrix<std::int64_t>(static_cast<std::size_t>(cfg.horizon),
                                             static_cast<std::size_t>(cfg.dims), std::move(values)),
                        clamped};
}

std::string chunk_to_text(const ActionChunk& chunk, const CodecConfig& cfg) {
  return encode_text(quantize(chunk, cfg));
}

std::string codec_config_to_json(const CodecConfig& cfg) {
  json bounds = json::array();
  for (const auto& b : cfg.bounds) bounds.push_back({b.lo, b.hi});
  json doc = {{"dims", cfg.dims}, {"bounds", bounds}, {"resolution", cfg.resolution},
              {"horizon", cfg.horizon}};
  return doc.dump(2);
}

CodecConfig codec_config_from_json(std::string_view text) {
  CodecConfig cfg;
  try {
    const json doc = json::parse(text);
    cfg.dims = doc.at("dims").get<int>();
    cfg.resolution = doc.at("resolution").get<int>();
    cfg.horizon = doc.at("horizon").get<int>();
    for (const auto& pair : doc.at("bounds")) {
      if (!pair.is_array() || pair.size() != 2) throw CodecError("each bound must be [lo, hi]");
      cfg.bounds.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
  } catch (const json::exception& e) {
    throw CodecError(std::string("malformed bounds document: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

void save_codec_config(const CodecConfig& cfg, const std::filesystem::path& path) {
  cfg.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << codec_config_to_json(cfg) << '\n';
}

CodecConfig load_codec_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return codec_config_from_json(buf.str());
}

}  // namespace textact
