#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attncite/types.hpp"

namespace attncite {

inline constexpr int kTraceSchemaVersion = 1;

struct RawDims {
  std::size_t layers = 0;
  std::size_t heads = 0;
  friend bool operator==(const RawDims&, const RawDims&) = default;
};

// Everything about a generation run except the attention payload.
//
// Token spans index into source_text / gen_text. Image tokens are
// zero-width spans. source_region marks the token columns that belong to
// the user document; prompt and template tokens fall outside it.
struct TraceMeta {
  Mode mode = Mode::kText;
  std::string source_text;
  std::vector<CharSpan> source_tokens;
  std::optional<IndexRange> image_block;
  std::optional<CharSpan> caption_span;
  std::string gen_text;
  std::vector<CharSpan> gen_tokens;
  IndexRange source_region;
  std::optional<RawDims> raw_dims;

  friend bool operator==(const TraceMeta&, const TraceMeta&) = default;
};

// Pooled attention, one row per generated token, one column per source
// token position. Rows are not normalized.
class AttentionMatrix {
 public:
  AttentionMatrix() = default;
  AttentionMatrix(std::size_t rows, std::size_t cols);
  AttentionMatrix(std::size_t rows, std::size_t cols, std::vector<float> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<const float> row(std::size_t t) const {
    return {values_.data() + t * cols_, cols_};
  }
  std::span<float> row(std::size_t t) { return {values_.data() + t * cols_, cols_}; }
  float at(std::size_t t, std::size_t k) const { return values_[t * cols_ + k]; }
  float& at(std::size_t t, std::size_t k) { return values_[t * cols_ + k]; }

  const std::vector<float>& values() const { return values_; }

  friend bool operator==(const AttentionMatrix&, const AttentionMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> values_;
};

// Unpooled attention with dims (T_gen, L, H, K_src), row-major.
class RawAttentionTensor {
 public:
  RawAttentionTensor(std::size_t gen, RawDims dims, std::size_t cols,
                     std::vector<float> values);

  std::size_t gen_tokens() const { return gen_; }
  RawDims dims() const { return dims_; }
  std::size_t cols() const { return cols_; }
  std::span<const float> slice(std::size_t t, std::size_t layer, std::size_t head) const;
  const std::vector<float>& values() const { return values_; }

 private:
  std::size_t gen_;
  RawDims dims_;
  std::size_t cols_;
  std::vector<float> values_;
};

struct Trace {
  TraceMeta meta;
  AttentionMatrix attention;
};

// Throws Error(kInvalidInput) naming the first violated field.
void validate_meta(const TraceMeta& meta);
void validate_trace(const TraceMeta& meta, const AttentionMatrix& attention);

// Reads <dir>/meta.json and <dir>/attn.bin and validates both.
Trace load_trace(const std::filesystem::path& dir);
// Reads <dir>/raw.bin using meta.raw_dims.
RawAttentionTensor load_raw(const std::filesystem::path& dir, const TraceMeta& meta);

// Canonical writer; load_trace(save_trace(x)) reproduces the same bytes.
void save_trace(const std::filesystem::path& dir, const Trace& trace);
void save_raw(const std::filesystem::path& dir, const RawAttentionTensor& raw);

std::string meta_to_json(const TraceMeta& meta);
TraceMeta meta_from_json(const std::string& text);

// Mean over layers and heads for every generated token.
AttentionMatrix pool_raw(const RawAttentionTensor& raw);

// Little-endian float32 payload helpers shared by trace and embedding I/O.
std::vector<float> decode_f32le(std::span<const unsigned char> bytes);
std::vector<unsigned char> encode_f32le(std::span<const float> values);

}  // namespace attncite
