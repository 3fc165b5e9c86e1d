#include "attncite/trace.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "attncite/error.hpp"
#include "attncite/io.hpp"

namespace attncite {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kMetaFile = "meta.json";
constexpr const char* kAttnFile = "attn.bin";
constexpr const char* kRawFile = "raw.bin";

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw Error(ErrorKind::kInvalidInput, message, field);
}

void validate_spans(const std::vector<CharSpan>& spans, std::size_t text_size,
                    const std::string& field) {
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& s = spans[i];
    const std::string where = field + "[" + std::to_string(i) + "]";
    if (s.begin > s.end) fail(where, "span start after end");
    if (s.end > text_size) fail(where, "span exceeds text length");
    if (s.begin < prev_end) fail(where, "span overlaps or is out of order");
    prev_end = s.end;
  }
}

ordered_json span_json(std::size_t a, std::size_t b) { return ordered_json::array({a, b}); }

ordered_json spans_json(const std::vector<CharSpan>& spans) {
  ordered_json out = ordered_json::array();
  for (const auto& s : spans) out.push_back(span_json(s.begin, s.end));
  return out;
}

std::pair<std::size_t, std::size_t> read_pair(const ordered_json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_unsigned() ||
      !j[1].is_number_unsigned()) {
    fail(field, "expected [start, end] pair of non-negative integers");
  }
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

std::vector<CharSpan> read_spans(const ordered_json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected array of spans");
  std::vector<CharSpan> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto [a, b] = read_pair(j[i], field + "[" + std::to_string(i) + "]");
    out.push_back({a, b});
  }
  return out;
}

const ordered_json& require(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(key, "missing field");
  return *it;
}

std::string require_string(const ordered_json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_string()) fail(key, "expected string");
  return v.get<std::string>();
}

void check_values(std::span<const float> values, std::size_t cols, const char* file) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = values[i];
    if (!std::isfinite(v) || v < 0.0f) {
      fail(std::string(file) + "[row " + std::to_string(i / cols) + ", col " +
               std::to_string(i % cols) + "]",
           std::isnan(v) ? "NaN attention value" : "attention value not finite and >= 0");
    }
  }
}

}  // namespace

AttentionMatrix::AttentionMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0f) {}

AttentionMatrix::AttentionMatrix(std::size_t rows, std::size_t cols, std::vector<float> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) fail("attn.bin", "binary length mismatch");
}

RawAttentionTensor::RawAttentionTensor(std::size_t gen, RawDims dims, std::size_t cols,
                                       std::vector<float> values)
    : gen_(gen), dims_(dims), cols_(cols), values_(std::move(values)) {
  if (dims_.layers < 1 || dims_.heads < 1) fail("raw_dims", "L and H must be >= 1");
  if (values_.size() != gen_ * dims_.layers * dims_.heads * cols_) {
    fail("raw.bin", "binary length mismatch");
  }
  check_values(values_, cols_ == 0 ? 1 : cols_, "raw.bin");
}

std::span<const float> RawAttentionTensor::slice(std::size_t t, std::size_t layer,
                                                 std::size_t head) const {
  const std::size_t offset = ((t * dims_.layers + layer) * dims_.heads + head) * cols_;
  return {values_.data() + offset, cols_};
}

std::vector<float> decode_f32le(std::span<const unsigned char> bytes) {
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = static_cast<std::uint32_t>(bytes[4 * i]) |
                         static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8 |
                         static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16 |
                         static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24;
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

std::vector<unsigned char> encode_f32le(std::span<const float> values) {
  std::vector<unsigned char> out(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(values[i]);
    out[4 * i] = static_cast<unsigned char>(bits);
    out[4 * i + 1] = static_cast<unsigned char>(bits >> 8);
    out[4 * i + 2] = static_cast<unsigned char>(bits >> 16);
    out[4 * i + 3] = static_cast<unsigned char>(bits >> 24);
  }
  return out;
}

void validate_meta(const TraceMeta& meta) {
  validate_spans(meta.source_tokens, meta.source_text.size(), "source_tokens");
  validate_spans(meta.gen_tokens, meta.gen_text.size(), "gen_tokens");

  const std::size_t n_src = meta.source_tokens.size();
  if (meta.source_region.empty()) fail("source_region", "must be non-empty");
  if (meta.source_region.begin > meta.source_region.end || meta.source_region.end > n_src) {
    fail("source_region", "range outside source token positions");
  }

  if (meta.image_block) {
    const auto& ib = *meta.image_block;
    if (ib.empty() || ib.begin > ib.end || ib.end > n_src) {
      fail("image_block", "range empty or outside source token positions");
    }
    for (std::size_t t = ib.begin; t < ib.end; ++t) {
      if (!meta.source_tokens[t].empty()) {
        fail("image_block", "image token " + std::to_string(t) + " has non-zero-width char span");
      }
    }
  }
  if (meta.mode == Mode::kImgRaw && !meta.image_block) {
    fail("image_block", "required for mode IMG_RAW");
  }

  const bool cap_mode = meta.mode == Mode::kImgCap;
  if (cap_mode != meta.caption_span.has_value()) {
    fail("caption_span", "present iff mode is IMG_CAP");
  }
  if (meta.caption_span) {
    const auto& c = *meta.caption_span;
    if (c.begin >= c.end || c.end > meta.source_text.size()) {
      fail("caption_span", "empty or outside source_text");
    }
  }
  if (meta.raw_dims && (meta.raw_dims->layers < 1 || meta.raw_dims->heads < 1)) {
    fail("raw_dims", "L and H must be >= 1");
  }
}

void validate_trace(const TraceMeta& meta, const AttentionMatrix& attention) {
  validate_meta(meta);
  if (attention.rows() != meta.gen_tokens.size()) {
    fail("attn.bin", "rows " + std::to_string(attention.rows()) + " != gen_tokens " +
                         std::to_string(meta.gen_tokens.size()));
  }
  if (attention.cols() != meta.source_tokens.size()) {
    fail("attn.bin", "cols " + std::to_string(attention.cols()) + " != source_tokens " +
                         std::to_string(meta.source_tokens.size()));
  }
  check_values(attention.values(), attention.cols() == 0 ? 1 : attention.cols(), "attn.bin");
}

std::string meta_to_json(const TraceMeta& meta) {
  ordered_json j;
  j["schema_version"] = kTraceSchemaVersion;
  j["mode"] = std::string(mode_name(meta.mode));
  j["source_text"] = meta.source_text;
  j["source_tokens"] = spans_json(meta.source_tokens);
  if (meta.image_block) j["image_block"] = span_json(meta.image_block->begin, meta.image_block->end);
  if (meta.caption_span) {
    j["caption_span"] = span_json(meta.caption_span->begin, meta.caption_span->end);
  }
  j["gen_text"] = meta.gen_text;
  j["gen_tokens"] = spans_json(meta.gen_tokens);
  j["source_region"] = span_json(meta.source_region.begin, meta.source_region.end);
  if (meta.raw_dims) {
    ordered_json dims;
    dims["L"] = meta.raw_dims->layers;
    dims["H"] = meta.raw_dims->heads;
    j["raw_dims"] = dims;
  }
  return j.dump(2) + "\n";
}

TraceMeta meta_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail("meta.json", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) fail("meta.json", "expected JSON object");

  const auto& version = require(j, "schema_version");
  if (!version.is_number_integer() || version.get<int>() != kTraceSchemaVersion) {
    fail("schema_version", "unsupported schema version");
  }
  TraceMeta meta;
  const auto mode = parse_mode_name(require_string(j, "mode"));
  if (!mode) fail("mode", "expected TEXT, IMG_RAW or IMG_CAP");
  meta.mode = *mode;
  meta.source_text = require_string(j, "source_text");
  meta.source_tokens = read_spans(require(j, "source_tokens"), "source_tokens");
  if (auto it = j.find("image_block"); it != j.end() && !it->is_null()) {
    auto [a, b] = read_pair(*it, "image_block");
    meta.image_block = IndexRange{a, b};
  }
  if (auto it = j.find("caption_span"); it != j.end() && !it->is_null()) {
    auto [a, b] = read_pair(*it, "caption_span");
    meta.caption_span = CharSpan{a, b};
  }
  meta.gen_text = require_string(j, "gen_text");
  meta.gen_tokens = read_spans(require(j, "gen_tokens"), "gen_tokens");
  {
    auto [a, b] = read_pair(require(j, "source_region"), "source_region");
    meta.source_region = IndexRange{a, b};
  }
  if (auto it = j.find("raw_dims"); it != j.end() && !it->is_null()) {
    const auto& d = *it;
    if (!d.is_object() || !d.contains("L") || !d.contains("H") ||
        !d["L"].is_number_unsigned() || !d["H"].is_number_unsigned()) {
      fail("raw_dims", "expected {\"L\": n, \"H\": n}");
    }
    meta.raw_dims = RawDims{d["L"].get<std::size_t>(), d["H"].get<std::size_t>()};
  }
  validate_meta(meta);
  return meta;
}

Trace load_trace(const std::filesystem::path& dir) {
  const auto meta_path = dir / kMetaFile;
  const auto attn_path = dir / kAttnFile;
  if (!std::filesystem::exists(meta_path)) {
    throw Error(ErrorKind::kMissingInput, "missing file", meta_path.string());
  }
  if (!std::filesystem::exists(attn_path)) {
    throw Error(ErrorKind::kMissingInput, "missing file", attn_path.string());
  }
  Trace trace;
  trace.meta = meta_from_json(io::read_text(meta_path));

  const auto bytes = io::read_bytes(attn_path);
  const std::size_t rows = trace.meta.gen_tokens.size();
  const std::size_t cols = trace.meta.source_tokens.size();
  if (bytes.size() != rows * cols * 4) {
    fail("attn.bin", "binary length mismatch: " + std::to_string(bytes.size()) +
                         " bytes, meta declares " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " float32");
  }
  trace.attention = AttentionMatrix(rows, cols, decode_f32le(bytes));
  validate_trace(trace.meta, trace.attention);
  return trace;
}

RawAttentionTensor load_raw(const std::filesystem::path& dir, const TraceMeta& meta) {
  if (!meta.raw_dims) fail("raw_dims", "meta.json declares no raw tensor");
  const auto path = dir / kRawFile;
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::kMissingInput, "missing file", path.string());
  }
  const auto bytes = io::read_bytes(path);
  const std::size_t expected = meta.gen_tokens.size() * meta.raw_dims->layers *
                               meta.raw_dims->heads * meta.source_tokens.size();
  if (bytes.size() != expected * 4) fail("raw.bin", "binary length mismatch");
  return RawAttentionTensor(meta.gen_tokens.size(), *meta.raw_dims, meta.source_tokens.size(),
                            decode_f32le(bytes));
}

void save_trace(const std::filesystem::path& dir, const Trace& trace) {
  validate_trace(trace.meta, trace.attention);
  std::filesystem::create_directories(dir);
  io::write_text(dir / kMetaFile, meta_to_json(trace.meta));
  io::write_bytes(dir / kAttnFile, encode_f32le(trace.attention.values()));
}

void save_raw(const std::filesystem::path& dir, const RawAttentionTensor& raw) {
  io::write_bytes(dir / kRawFile, encode_f32le(raw.values()));
}

AttentionMatrix pool_raw(const RawAttentionTensor& raw) {
  const auto [layers, heads] = raw.dims();
  const std::size_t cols = raw.cols();
  const std::size_t slices = layers * heads;
  AttentionMatrix out(raw.gen_tokens(), cols);
  // Summation runs over sorted values so the result does not depend on
  // slice order.
  std::vector<float> column(slices);
  for (std::size_t t = 0; t < raw.gen_tokens(); ++t) {
    auto row = out.row(t);
    for (std::size_t k = 0; k < cols; ++k) {
      for (std::size_t l = 0; l < layers; ++l) {
        for (std::size_t h = 0; h < heads; ++h) column[l * heads + h] = raw.slice(t, l, h)[k];
      }
      std::sort(column.begin(), column.end());
      double acc = 0.0;
      for (float v : column) acc += v;
      row[k] = static_cast<float>(acc / static_cast<double>(slices));
    }
  }
  return out;
}

}  // namespace attncite
